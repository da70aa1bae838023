#include "expint/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <random>

#include <json.hpp>

#include "expint/integrator.hpp"
#include "expint/sparse.hpp"

namespace expint {

namespace {

constexpr double stencil_flops = 10.0;
constexpr double split_flops = 11.0;
constexpr double nonlinearity_flops = 7.0;

std::string shortest(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

bool is_stencil_kernel(const std::string& k) {
    return k == "stencil" || k == "stencil_coeff" || k == "stencil_split";
}

BoundaryCondition make_boundary(const BenchSpec& spec) {
    if (spec.boundary == "none") return BoundaryCondition::periodic();
    if (spec.boundary == "homogeneous") return BoundaryCondition::homogeneous();
    if (!spec.boundary_fn) {
        throw ConfigError("boundary '" + spec.boundary + "' has no function attached");
    }
    return BoundaryCondition::function(spec.boundary_fn, spec.boundary);
}

template <class T>
std::vector<T> random_input(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    std::vector<T> x(n);
    for (auto& v : x) {
        if constexpr (is_complex_v<T>) {
            const double re = dist(rng);
            v = T(re, dist(rng));
        } else {
            v = static_cast<T>(dist(rng));
        }
    }
    return x;
}

struct Prepared {
    std::function<void()> run;
    double flops = 0.0;
    std::uint64_t bytes = 0;
};

template <class T>
BenchResult measure(const BenchSpec& spec) {
    const Grid3D g(spec.grid[0], spec.grid[1], spec.grid[2]);
    const std::size_t n = g.size();
    const std::uint64_t vb = sizeof(T);
    const auto x = random_input<T>(n, spec.seed);
    std::vector<T> y(n);
    const T alpha = static_cast<T>(1e-4);
    const T beta = T(1);

    StencilOperator<T> op{g};
    op.bc = make_boundary(spec);
    op.traversal = spec.traversal;
    op.tile = spec.tile;
    op.threads = spec.workers;

    Prepared p;
    // kept alive for the duration of the timing loop
    std::vector<T> b_scaled;
    CsrMatrix<T> A;

    if (spec.kernel == "stencil" || spec.kernel == "stencil_coeff") {
        double per_point = stencil_flops;
        if (spec.kernel == "stencil_coeff") {
            op.coeff = inverse_radial_diffusion();
            per_point += op.coeff->flops;
        }
        p.run = [&] { affine_fused_apply(op, alpha, beta, std::span<const T>(x), std::span<T>(y)); };
        p.flops = per_point * static_cast<double>(n);
        p.bytes = 2 * vb * n;
    } else if (spec.kernel == "stencil_split") {
        const auto b = boundary_source(op);
        b_scaled.resize(n);
        for (std::size_t i = 0; i < n; ++i) b_scaled[i] = alpha * b[i];
        op = homogeneous_part(op);
        p.run = [&] {
            fused_apply(op, alpha, beta, std::span<const T>(x), std::span<T>(y));
            for (std::size_t i = 0; i < n; ++i) y[i] += b_scaled[i];
        };
        p.flops = split_flops * static_cast<double>(n);
        p.bytes = 3 * vb * n;
    } else if (spec.kernel == "csr") {
        A = assemble_stencil(homogeneous_part(op)).first;
        A.threads = spec.workers;
        p.run = [&] { fused_spmv(A, alpha, beta, std::span<const T>(x), std::span<T>(y)); };
        p.flops = 2.0 * static_cast<double>(A.nnz()) + 3.0 * static_cast<double>(n);
        p.bytes = csr_memory_bytes(A.nnz(), n, vb, sizeof(std::int32_t)) + 2 * vb * n;
    } else if (spec.kernel == "nonlinearity") {
        if constexpr (is_complex_v<T>) {
            throw ConfigError("the nonlinearity kernel is real-valued");
        } else {
            const auto g_fn = combustion_nonlinearity<T>();
            p.run = [&, g_fn] { g_fn.eval(0.0, 0, n, std::span<const T>(x), std::span<T>(y)); };
            p.flops = nonlinearity_flops * static_cast<double>(n);
            p.bytes = 2 * vb * n;
        }
    } else if (spec.kernel == "dummy") {
        std::copy(x.begin(), x.end(), y.begin());
        p.run = [] {};
        p.flops = 0.0;
        p.bytes = 0;
    } else {
        throw ConfigError("unknown bench kernel '" + spec.kernel + "'");
    }

    for (int i = 0; i < spec.warmup; ++i) p.run();
    BenchResult r;
    r.spec = spec;
    r.n = n;
    r.times_s.reserve(static_cast<std::size_t>(spec.repetitions));
    for (int i = 0; i < spec.repetitions; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        p.run();
        const auto t1 = std::chrono::steady_clock::now();
        r.times_s.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    r.median_s = median(r.times_s);
    r.min_s = *std::min_element(r.times_s.begin(), r.times_s.end());
    r.flops = p.flops;
    r.gflops = gflops(p.flops, r.median_s);
    r.bytes = p.bytes;
    r.checksum = fnv1a(y.data(), y.size() * sizeof(T));
    return r;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> row_of(const BenchResult& r) {
    return {r.spec.device,
            r.spec.boundary,
            r.method(),
            to_string(r.spec.precision),
            shortest(r.median_s * 1e3),
            shortest(r.gflops),
            r.spec.kernel,
            std::to_string(r.spec.grid[0]),
            std::to_string(r.spec.grid[1]),
            std::to_string(r.spec.grid[2]),
            std::to_string(r.n),
            std::to_string(r.spec.repetitions),
            std::to_string(r.spec.warmup),
            std::to_string(r.spec.workers),
            shortest(r.min_s * 1e3),
            shortest(r.flops),
            std::to_string(r.bytes),
            std::to_string(r.checksum)};
}

} // namespace

void BenchSpec::validate() const {
    if (repetitions < 3) throw ConfigError("repetitions must be at least 3");
    if (warmup < 0) throw ConfigError("warmup must be nonnegative");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    for (int e : grid) {
        if (e < 1) throw ConfigError("grid extents must be positive");
    }
    const auto& ks = bench_kernels();
    if (std::none_of(ks.begin(), ks.end(), [&](const KernelInfo& k) { return k.id == kernel; })) {
        throw ConfigError("unknown bench kernel '" + kernel + "'");
    }
    if (boundary != "none" && boundary != "homogeneous" && !boundary_fn) {
        throw ConfigError("boundary '" + boundary + "' has no function attached");
    }
}

std::string BenchResult::method() const {
    return is_stencil_kernel(spec.kernel) ? to_string(spec.traversal) : spec.kernel;
}

const std::vector<KernelInfo>& bench_kernels() {
    static const std::vector<KernelInfo> kernels = {
        {"stencil", "fused (alpha A + beta I) x, boundary inline, 10 flops per point"},
        {"stencil_coeff", "stencil premultiplied by D = 1/sqrt(1+x^2+y^2), 16 flops per point"},
        {"stencil_split", "homogeneous stencil plus precomputed boundary source, 11 flops per point"},
        {"csr", "fused SpMV on the assembled stencil, 2 nnz + 3 n flops"},
        {"nonlinearity", "pointwise combustion nonlinearity, 7 flops per point"},
        {"dummy", "no work, 0 flops"},
    };
    return kernels;
}

BenchResult run_bench(const BenchSpec& spec) {
    spec.validate();
    switch (spec.precision) {
    case ScalarKind::f32: return measure<float>(spec);
    case ScalarKind::f64: return measure<double>(spec);
    case ScalarKind::c128: return measure<std::complex<double>>(spec);
    }
    throw ConfigError("unknown precision");
}

double median(std::vector<double> values) {
    if (values.empty()) throw DimensionError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t k = values.size() / 2;
    if (values.size() % 2 == 1) return values[k];
    return 0.5 * (values[k - 1] + values[k]);
}

double gflops(double flops, double seconds) {
    if (flops == 0.0 || seconds == 0.0) return 0.0;
    return flops / seconds / 1e9;
}

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> bench_csv_columns() {
    return {"device", "boundary", "method",  "precision", "median_ms", "gflops",
            "kernel", "nx",       "ny",      "nz",        "n",         "repetitions",
            "warmup", "workers",  "min_ms",  "flops",     "bytes",     "checksum"};
}

void report_csv(const std::vector<BenchResult>& results, std::ostream& os) {
    auto write_row = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) os << ',';
            os << quote(fields[i]);
        }
        os << "\r\n";
    };
    write_row(bench_csv_columns());
    for (const auto& r : results) write_row(row_of(r));
}

void report_csv(const std::vector<BenchResult>& results, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    report_csv(results, os);
    if (!os) throw Error("write failed for " + path.string());
}

void report_json(const std::vector<BenchResult>& results, std::ostream& os) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results) {
        arr.push_back({{"device", r.spec.device},
                       {"boundary", r.spec.boundary},
                       {"method", r.method()},
                       {"precision", to_string(r.spec.precision)},
                       {"median_ms", r.median_s * 1e3},
                       {"gflops", r.gflops},
                       {"kernel", r.spec.kernel},
                       {"nx", r.spec.grid[0]},
                       {"ny", r.spec.grid[1]},
                       {"nz", r.spec.grid[2]},
                       {"n", r.n},
                       {"repetitions", r.spec.repetitions},
                       {"warmup", r.spec.warmup},
                       {"workers", r.spec.workers},
                       {"min_ms", r.min_s * 1e3},
                       {"flops", r.flops},
                       {"bytes", r.bytes},
                       {"checksum", r.checksum}});
    }
    os << arr.dump(2) << '\n';
}

std::vector<std::vector<std::string>> parse_csv(std::istream& is) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    char c;
    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        any = false;
    };
    while (is.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (is.peek() == '"') {
                    is.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (is.peek() == '\n') is.get(c);
            end_row();
        } else if (c == '\n') {
            end_row();
        } else {
            field += c;
        }
    }
    if (quoted) throw ParseError("unterminated quoted CSV field", rows.size() + 1);
    if (any) end_row();
    return rows;
}

} // namespace expint
