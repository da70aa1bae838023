#include "expint/sparse.hpp"

#include <cmath>
#include <map>

namespace expint {

template <class T>
std::pair<CsrMatrix<T>, std::vector<T>> assemble_stencil(const StencilOperator<T>& op) {
    const Grid3D& g = op.grid;
    const std::size_t n = g.size();
    if (n > assemble_limit) {
        throw SizeLimitError("grid of " + std::to_string(n) + " points exceeds the assembly limit of " +
                             std::to_string(assemble_limit));
    }
    const auto kind = op.bc.kind();
    const bool periodic = kind == BoundaryCondition::Kind::none;
    const int ext[3] = {g.nx(), g.ny(), g.nz()};

    std::vector<std::int32_t> row_ptr(n + 1, 0);
    std::vector<std::int32_t> col_idx;
    std::vector<T> vals;
    std::vector<T> b(n, T{});
    col_idx.reserve(7 * n);
    vals.reserve(7 * n);

    std::map<std::size_t, double> row;
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = index_triple(g, i);
        const double pos[3] = {g.coord(0, idx[0]), g.coord(1, idx[1]), g.coord(2, idx[2])};
        const double d = op.coeff ? op.coeff->fn(pos[0], pos[1], pos[2]) : 1.0;
        row.clear();
        double bi = 0.0;
        for (int a = 0; a < 3; ++a) {
            if (g.collapsed(a)) continue;
            const double w = d / (g.spacing(a) * g.spacing(a));
            row[i] += 2.0 * w;
            for (int side : {-1, 1}) {
                auto nb = idx;
                nb[a] += side;
                if (nb[a] >= 0 && nb[a] < ext[a]) {
                    row[linear_index(g, nb[0], nb[1], nb[2])] -= w;
                } else if (periodic) {
                    nb[a] = (nb[a] + ext[a]) % ext[a];
                    row[linear_index(g, nb[0], nb[1], nb[2])] -= w;
                } else if (kind == BoundaryCondition::Kind::dirichlet_function) {
                    double q[3] = {pos[0], pos[1], pos[2]};
                    q[a] = side < 0 ? 0.0 : 1.0;
                    const double f = op.bc.function()(q[0], q[1], q[2]);
                    if (!std::isfinite(f)) throw EvaluationError("non-finite boundary value");
                    bi -= w * f;
                }
            }
        }
        for (const auto& [c, v] : row) {
            col_idx.push_back(static_cast<std::int32_t>(c));
            vals.push_back(static_cast<T>(v));
        }
        row_ptr[i + 1] = static_cast<std::int32_t>(col_idx.size());
        b[i] = static_cast<T>(bi);
    }
    return {CsrMatrix<T>(n, n, std::move(row_ptr), std::move(col_idx), std::move(vals)), std::move(b)};
}

template std::pair<CsrMatrix<float>, std::vector<float>> assemble_stencil(const StencilOperator<float>&);
template std::pair<CsrMatrix<double>, std::vector<double>> assemble_stencil(const StencilOperator<double>&);
template std::pair<CsrMatrix<std::complex<double>>, std::vector<std::complex<double>>>
assemble_stencil(const StencilOperator<std::complex<double>>&);

} // namespace expint
