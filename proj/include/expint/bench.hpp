#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "expint/stencil.hpp"

namespace expint {

struct BenchSpec {
    std::string kernel = "stencil";
    std::array<int, 3> grid{64, 64, 64};
    ScalarKind precision = ScalarKind::f64;
    /// "none", "homogeneous", or a label for `boundary_fn`.
    std::string boundary = "homogeneous";
    ScalarFunction boundary_fn;
    Traversal traversal = Traversal::naive;
    TileShape tile{};
    int repetitions = 5;
    int warmup = 2;
    int workers = 1;
    std::string device = "cpu";
    std::uint64_t seed = 42;

    void validate() const;
};

struct BenchResult {
    BenchSpec spec;
    std::size_t n = 0;
    std::vector<double> times_s; // measured repetitions, warmup excluded
    double median_s = 0.0;
    double min_s = 0.0;
    double flops = 0.0; // per kernel invocation
    double gflops = 0.0;
    std::uint64_t bytes = 0; // estimated memory traffic per invocation
    std::uint64_t checksum = 0;

    std::string method() const;
};

/// Registered kernel: declared flop count per invocation and a short description.
struct KernelInfo {
    std::string id;
    std::string description;
};

/// stencil (10 flops/point), stencil_coeff (10 + flops of D), stencil_split
/// (11), csr (2 nnz + 3 n), nonlinearity (7) and dummy (0).
const std::vector<KernelInfo>& bench_kernels();

BenchResult run_bench(const BenchSpec& spec);

/// Middle element, or the mean of the two middle elements.
double median(std::vector<double> values);

/// flops / seconds / 1e9; zero when either operand is zero.
double gflops(double flops, double seconds);

/// FNV-1a over the raw bytes.
std::uint64_t fnv1a(const void* data, std::size_t bytes);

std::vector<std::string> bench_csv_columns();

/// RFC 4180 CSV, one row per result, header first.
void report_csv(const std::vector<BenchResult>& results, std::ostream& os);
void report_csv(const std::vector<BenchResult>& results, const std::filesystem::path& path);

/// Same fields as the CSV, as an array of objects.
void report_json(const std::vector<BenchResult>& results, std::ostream& os);

/// Rows of an RFC 4180 document, header included.
std::vector<std::vector<std::string>> parse_csv(std::istream& is);

} // namespace expint
