// Command-line front end: quantize FP32 matrices into MX tensor files, run
// the GEMM kernels, reproduce the benchmark sweeps, and check the datapath
// against the arbitrary-precision oracle.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or format error.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mxdp/io/bench_report.hpp"
#include "mxdp/io/matrix_file.hpp"
#include "mxdp/io/tensor_file.hpp"
#include "mxdp/isa/kernels.hpp"
#include "mxdp/verify.hpp"

namespace {

using namespace mxdp;
using namespace mxdp::isa;

constexpr size_t kL1Bytes = 128 * 1024;

Fp8Format parse_format(const std::string& s) {
    if (s == "e5m2") return Fp8Format::E5M2;
    if (s == "e4m3") return Fp8Format::E4M3;
    throw CLI::ValidationError("--format", "expected e5m2 or e4m3");
}

CycleModel load_model(const std::string& path) {
    return path.empty() ? CycleModel::defaults() : CycleModel::from_file(path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

nlohmann::ordered_json report_json(const CycleReport& r, double freq_ghz) {
    nlohmann::ordered_json j;
    j["variant"] = std::string(kernel_variant_name(r.variant));
    j["m"] = r.m;
    j["n"] = r.n;
    j["k"] = r.k;
    j["cores"] = r.cores;
    j["total_cycles"] = r.total_cycles;
    j["useful_flops"] = r.useful_flops;
    j["peak_flops_per_cycle_core"] = r.peak_flops_per_cycle_core;
    j["utilization"] = r.utilization();
    j["gflops"] = r.gflops_at(freq_ghz);
    j["freq_ghz"] = freq_ghz;
    nlohmann::ordered_json counts;
    for (const auto& [cls, cnt] : r.issued) {
        counts[std::string(instr_class_name(cls))] = cnt;
    }
    j["issued_instructions"] = counts;
    return j;
}

int cmd_quantize(const std::string& input, const std::string& output,
                 const std::string& format, size_t block_size) {
    const io::Fp32Matrix m = io::load_matrix(input);
    std::vector<double> values(m.values.begin(), m.values.end());
    const MxTensor t =
        quantize_matrix(values, m.rows, m.cols, parse_format(format),
                        block_size);
    io::save_tensor(t, output);

    const std::vector<double> back = dequantize_matrix(t);
    double max_err = 0.0, sum_err = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        const double e = std::fabs(back[i] - values[i]);
        max_err = std::max(max_err, e);
        sum_err += e;
    }
    std::printf("quantized %zux%zu to %s (%s, block %zu)\n", m.rows, m.cols,
                output.c_str(), format.c_str(), block_size);
    std::printf("dequantization error: max %.6g mean %.6g\n", max_err,
                values.empty() ? 0.0 : sum_err / values.size());
    return 0;
}

int cmd_gemm(const std::string& a_path, const std::string& b_path,
             const std::string& variant_name, unsigned cores,
             const std::string& output, const std::string& report_path,
             const std::string& model_path, const std::string& format,
             double freq_ghz) {
    const CycleModel model = load_model(model_path);
    KernelVariant variant;
    if (variant_name == "fp32") {
        variant = KernelVariant::FP32;
    } else if (variant_name == "fp8-to-fp32") {
        variant = KernelVariant::FP8_TO_FP32;
    } else if (variant_name == "mxfp8") {
        variant = KernelVariant::MXFP8;
    } else {
        throw CLI::ValidationError("--variant",
                                   "expected fp32, fp8-to-fp32 or mxfp8");
    }

    GemmOperands ops;
    if (variant == KernelVariant::FP32) {
        const io::Fp32Matrix a = io::load_matrix(a_path);
        const io::Fp32Matrix bt = io::load_matrix(b_path);
        ops.m = a.rows;
        ops.k = a.cols;
        ops.n = bt.rows;
        if (bt.cols != a.cols) {
            throw std::runtime_error("reduction dimension mismatch");
        }
        ops.a_f32 = a.values;
        ops.bt_f32 = bt.values;
    } else {
        MxTensor a = io::load_tensor(a_path);
        MxTensor bt = io::load_tensor(b_path);
        if (!format.empty() && a.format != parse_format(format)) {
            throw std::runtime_error(
                "input tensor format does not match the configured format");
        }
        ops.m = a.rows;
        ops.k = a.cols;
        ops.n = bt.rows;
        ops.a_mx = std::move(a);
        ops.bt_mx = std::move(bt);
    }

    const GemmResult r = run_kernel(variant, ops, cores, model);
    io::save_matrix({ops.m, ops.n, r.c}, output);
    if (!report_path.empty()) {
        write_text(report_path, report_json(r.report, freq_ghz).dump(2) + "\n");
    }
    std::printf("%s GEMM %zux%zux%zu on %u cores: %" PRIu64
                " cycles, utilization %.4f, %.2f GFLOPS at %.2f GHz\n",
                variant_name.c_str(), ops.m, ops.n, ops.k, cores,
                r.report.total_cycles, r.report.utilization(),
                r.report.gflops_at(freq_ghz), freq_ghz);
    return 0;
}

int cmd_bench(size_t m, size_t n, std::vector<size_t> ks, unsigned cores,
              double freq_ghz, uint64_t seed, const std::string& format,
              const std::string& model_path, const std::string& report_path,
              const std::string& csv_path) {
    const CycleModel model = load_model(model_path);
    const Fp8Format fmt = parse_format(format);
    if (ks.empty()) ks = {32, 64, 128, 256};

    io::BenchReport report;
    report.m = m;
    report.n = n;
    report.cores = cores;
    report.freq_ghz = freq_ghz;
    report.seed = seed;
    report.format = fmt;
    report.cycle_model_fingerprint = model.fingerprint();

    std::printf("%-12s %4s %10s %12s %9s %9s %9s\n", "variant", "k", "cycles",
                "utilization", "GFLOPS", "vs fp32", "vs fp8");
    for (size_t k : ks) {
        std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * k));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<double> av(m * k), bv(n * k);
        for (auto& x : av) x = dist(rng);
        for (auto& x : bv) x = dist(rng);
        const MxTensor a = quantize_matrix(av, m, k, fmt);
        const MxTensor bt = quantize_matrix(bv, n, k, fmt);
        const std::vector<float> af(av.begin(), av.end());
        const std::vector<float> bf(bv.begin(), bv.end());

        // FP32 operands at this shape must fit the 128 KiB L1
        const bool fp32_fits = (m * k + n * k + m * n) * 4 <= kL1Bytes;
        std::vector<CycleReport> reports;
        if (fp32_fits) {
            reports.push_back(run_fp32(af, bf, m, n, k, cores, model).report);
        }
        reports.push_back(run_fp8_to_fp32(a, bt, cores, model).report);
        reports.push_back(run_mxfp8(a, bt, cores, model).report);

        const auto rows = compute_metrics(reports, freq_ghz);
        for (const MetricsRow& row : rows) {
            io::BenchRecord rec;
            rec.variant = row.variant;
            rec.k = k;
            rec.cycles = row.cycles;
            rec.utilization = row.utilization;
            rec.gflops = row.gflops;
            if (row.speedup_vs_fp32 > 0) {
                rec.speedup_vs_fp32 = row.speedup_vs_fp32;
            }
            if (row.speedup_vs_fp8_to_fp32 > 0) {
                rec.speedup_vs_fp8_to_fp32 = row.speedup_vs_fp8_to_fp32;
            }
            report.records.push_back(rec);
            std::printf("%-12s %4zu %10" PRIu64 " %12.4f %9.2f",
                        std::string(kernel_variant_name(row.variant)).c_str(),
                        k, row.cycles, row.utilization, row.gflops);
            if (rec.speedup_vs_fp32) {
                std::printf(" %9.2f", *rec.speedup_vs_fp32);
            } else {
                std::printf(" %9s", "-");
            }
            if (rec.speedup_vs_fp8_to_fp32) {
                std::printf(" %9.2f", *rec.speedup_vs_fp8_to_fp32);
            } else {
                std::printf(" %9s", "-");
            }
            std::printf("\n");
        }
    }

    if (!report_path.empty()) {
        write_text(report_path, io::bench_report_json(report).dump(2) + "\n");
    }
    if (!csv_path.empty()) {
        write_text(csv_path, io::bench_report_csv(report));
    }
    return 0;
}

int cmd_verify(uint64_t cases, uint64_t seed) {
    const VerifyResult r = run_verification(cases, seed);
    std::printf("verify: %" PRIu64 " cases (%" PRIu64
                " random per format + directed corners), %" PRIu64
                " mismatches\n",
                r.cases_run, cases, r.mismatches);
    if (r.mismatches != 0) {
        std::printf("first failing input: %s\n", r.first_failure.c_str());
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Microscaling FP8 dot-product and streaming-core model"};
    app.require_subcommand(1);

    std::string format = "e4m3";
    size_t block_size = 32;
    unsigned cores = 8;
    double freq_ghz = 1.0;
    uint64_t seed = 1;
    std::string model_path, report_path, csv_path;

    auto* q = app.add_subcommand("quantize",
                                 "Quantize a raw FP32 matrix file to an MX "
                                 "tensor file");
    std::string q_in, q_out;
    q->add_option("input", q_in, "raw FP32 matrix file")->required();
    q->add_option("output", q_out, "MX tensor output path")->required();
    q->add_option("--format", format, "element format (e5m2|e4m3)");
    q->add_option("--block-size", block_size, "elements per scale block");

    auto* g = app.add_subcommand("gemm", "Run one GEMM kernel on input files");
    std::string g_a, g_b, g_variant = "mxfp8", g_out;
    g->add_option("a", g_a, "A operand file")->required();
    g->add_option("b", g_b, "B operand file, pre-transposed (n x k)")
        ->required();
    g->add_option("output", g_out, "FP32 result matrix path")->required();
    g->add_option("--variant", g_variant, "fp32 | fp8-to-fp32 | mxfp8");
    g->add_option("--cores", cores, "compute cores");
    g->add_option("--format", format, "require this element format");
    g->add_option("--freq-ghz", freq_ghz, "clock for GFLOPS reporting");
    g->add_option("--cycle-model", model_path, "cycle model file");
    g->add_option("--report", report_path, "JSON cycle report path");

    auto* b = app.add_subcommand("bench",
                                 "Sweep the three kernels over the reduction "
                                 "dimension");
    size_t b_m = 64, b_n = 64;
    std::vector<size_t> b_ks;
    b->add_option("--m", b_m, "output rows");
    b->add_option("--n", b_n, "output columns");
    b->add_option("--k", b_ks, "reduction sizes (default 32 64 128 256)");
    b->add_option("--cores", cores, "compute cores");
    b->add_option("--freq-ghz", freq_ghz, "clock frequency");
    b->add_option("--seed", seed, "random matrix seed");
    b->add_option("--format", format, "element format (e5m2|e4m3)");
    b->add_option("--cycle-model", model_path, "cycle model file");
    b->add_option("--report", report_path, "JSON report path");
    b->add_option("--csv", csv_path, "CSV report path");

    auto* v = app.add_subcommand("verify",
                                 "Check the datapath against the "
                                 "arbitrary-precision oracle");
    uint64_t v_cases = 1000000;
    v->add_option("--cases", v_cases, "random cases per element format");
    v->add_option("--seed", seed, "random case seed");

    try {
        app.parse(argc, argv);
        if (q->parsed()) return cmd_quantize(q_in, q_out, format, block_size);
        if (g->parsed()) {
            return cmd_gemm(g_a, g_b, g_variant, cores, g_out, report_path,
                            model_path, g->count("--format") ? format : "",
                            freq_ghz);
        }
        if (b->parsed()) {
            return cmd_bench(b_m, b_n, b_ks, cores, freq_ghz, seed, format,
                             model_path, report_path, csv_path);
        }
        if (v->parsed()) return cmd_verify(v_cases, seed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
