#include "expint/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace expint {

namespace {

enum class MmField { real, integer, complex, pattern };
enum class Symmetry { general, symmetric, skew, hermitian };

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string shortest(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

template <class T>
T conj_of(const T& v) {
    if constexpr (is_complex_v<T>) {
        return std::conj(v);
    } else {
        return v;
    }
}

struct Entry {
    std::int64_t row, col;
    std::size_t line;
    std::size_t slot; // index into the value array
};

} // namespace

template <class T>
CsrMatrix<T> read_matrix_market(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) throw ParseError("empty Matrix Market input", 1);
    ++lineno;
    std::istringstream hs(line);
    std::string banner, object, format, field_s, sym_s;
    hs >> banner >> object >> format >> field_s >> sym_s;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
        throw ParseError("malformed header, expected '%%MatrixMarket matrix ...'", lineno);
    }
    if (lower(format) != "coordinate") {
        throw ParseError("only the coordinate format is supported, got '" + format + "'", lineno);
    }
    MmField field;
    field_s = lower(field_s);
    if (field_s == "real" || field_s == "double") field = MmField::real;
    else if (field_s == "integer") field = MmField::integer;
    else if (field_s == "complex") field = MmField::complex;
    else if (field_s == "pattern") field = MmField::pattern;
    else throw ParseError("unknown field '" + field_s + "'", lineno);
    Symmetry sym;
    sym_s = lower(sym_s);
    if (sym_s == "general") sym = Symmetry::general;
    else if (sym_s == "symmetric") sym = Symmetry::symmetric;
    else if (sym_s == "skew-symmetric") sym = Symmetry::skew;
    else if (sym_s == "hermitian") sym = Symmetry::hermitian;
    else throw ParseError("unknown symmetry '" + sym_s + "'", lineno);
    if (field == MmField::complex && !is_complex_v<T>) {
        throw ParseError("complex matrix cannot be read into a real matrix", lineno);
    }
    if (sym == Symmetry::hermitian && field != MmField::complex && field != MmField::real) {
        throw ParseError("hermitian symmetry needs a real or complex field", lineno);
    }

    // size line, after comments
    std::int64_t nrows = -1, ncols = -1, nent = -1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        if (!(ss >> nrows >> ncols >> nent) || nrows < 0 || ncols < 0 || nent < 0) {
            throw ParseError("malformed size line", lineno);
        }
        break;
    }
    if (nrows < 0) throw ParseError("missing size line", lineno);
    if (sym != Symmetry::general && nrows != ncols) {
        throw ParseError("symmetric storage requires a square matrix", lineno);
    }
    CsrMatrix<T>::check_index_width(static_cast<std::size_t>(nrows), static_cast<std::size_t>(ncols),
                                    static_cast<std::size_t>(nent) * 2);

    std::vector<Entry> entries;
    std::vector<T> values;
    entries.reserve(static_cast<std::size_t>(nent) * (sym == Symmetry::general ? 1 : 2));
    std::int64_t seen = 0;
    while (seen < nent && std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        std::int64_t r, c;
        if (!(ss >> r >> c)) throw ParseError("malformed entry", lineno);
        if (r < 1 || r > nrows || c < 1 || c > ncols) {
            throw ParseError("index (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") out of bounds for " + std::to_string(nrows) + "x" +
                                 std::to_string(ncols),
                             lineno);
        }
        T v{};
        if (field == MmField::pattern) {
            v = T(1);
        } else if (field == MmField::complex) {
            double re, im;
            if (!(ss >> re >> im)) throw ParseError("expected real and imaginary parts", lineno);
            if constexpr (is_complex_v<T>) v = T(re, im);
        } else {
            double re;
            if (!(ss >> re)) throw ParseError("expected a value", lineno);
            v = static_cast<T>(re);
        }
        if (sym != Symmetry::general && c > r) {
            throw ParseError("symmetric storage must list the lower triangle only", lineno);
        }
        if (sym == Symmetry::skew && r == c) {
            throw ParseError("skew-symmetric matrices have no diagonal entries", lineno);
        }
        ++seen;
        entries.push_back({r - 1, c - 1, lineno, values.size()});
        values.push_back(v);
        if (sym != Symmetry::general && r != c) {
            T mirrored = v;
            if (sym == Symmetry::skew) mirrored = -v;
            if (sym == Symmetry::hermitian) mirrored = conj_of(v);
            entries.push_back({c - 1, r - 1, lineno, values.size()});
            values.push_back(mirrored);
        }
    }
    if (seen != nent) {
        throw ParseError("expected " + std::to_string(nent) + " entries, found " + std::to_string(seen),
                         lineno);
    }

    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.row != b.row) return a.row < b.row;
        if (a.col != b.col) return a.col < b.col;
        return a.line < b.line;
    });
    const auto n = static_cast<std::size_t>(nrows);
    std::vector<std::int32_t> row_ptr(n + 1, 0), col_idx;
    std::vector<T> vals;
    col_idx.reserve(entries.size());
    vals.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const Entry& e = entries[k];
        if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
            throw ParseError("duplicate entry (" + std::to_string(e.row + 1) + "," +
                                 std::to_string(e.col + 1) + ")",
                             std::max(e.line, entries[k - 1].line));
        }
        ++row_ptr[static_cast<std::size_t>(e.row) + 1];
        col_idx.push_back(static_cast<std::int32_t>(e.col));
        vals.push_back(values[e.slot]);
    }
    for (std::size_t r = 0; r < n; ++r) row_ptr[r + 1] += row_ptr[r];
    return CsrMatrix<T>(n, static_cast<std::size_t>(ncols), std::move(row_ptr), std::move(col_idx),
                        std::move(vals));
}

template <class T>
CsrMatrix<T> read_matrix_market(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path.string());
    return read_matrix_market<T>(is);
}

template <class T>
void write_matrix_market(const CsrMatrix<T>& A, std::ostream& os) {
    os << "%%MatrixMarket matrix coordinate " << (is_complex_v<T> ? "complex" : "real")
       << " general\n";
    os << A.nrows() << ' ' << A.ncols() << ' ' << A.nnz() << '\n';
    const auto rp = A.row_ptr();
    const auto ci = A.col_idx();
    const auto va = A.values();
    for (std::size_t r = 0; r < A.nrows(); ++r) {
        for (auto k = rp[r]; k < rp[r + 1]; ++k) {
            os << r + 1 << ' ' << ci[k] + 1 << ' ';
            if constexpr (is_complex_v<T>) {
                os << shortest(va[k].real()) << ' ' << shortest(va[k].imag()) << '\n';
            } else {
                os << shortest(static_cast<double>(va[k])) << '\n';
            }
        }
    }
}

template <class T>
void write_matrix_market(const CsrMatrix<T>& A, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_matrix_market(A, os);
    if (!os) throw Error("write failed for " + path.string());
}

#define EXPINT_INSTANTIATE_MM(T)                                                        \
    template CsrMatrix<T> read_matrix_market<T>(std::istream&);                          \
    template CsrMatrix<T> read_matrix_market<T>(const std::filesystem::path&);           \
    template void write_matrix_market<T>(const CsrMatrix<T>&, std::ostream&);            \
    template void write_matrix_market<T>(const CsrMatrix<T>&, const std::filesystem::path&);

EXPINT_INSTANTIATE_MM(float)
EXPINT_INSTANTIATE_MM(double)
EXPINT_INSTANTIATE_MM(std::complex<double>)

#undef EXPINT_INSTANTIATE_MM

} // namespace expint
