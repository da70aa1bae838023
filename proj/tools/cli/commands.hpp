#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "expint/stencil.hpp"

namespace expint::cli {

struct BenchOptions {
    std::string grid = "64";
    std::vector<std::string> precision{"f64"};
    std::vector<std::string> method{"naive"};
    std::vector<std::string> kernel{"stencil"};
    std::string boundary = "homogeneous";
    std::string tile = "64,8";
    int repetitions = 5;
    int warmup = 2;
    int workers = 1;
    std::uint64_t seed = 42;
    std::string device = "cpu";
    std::string out;
    bool json = false;
};

struct CombustionOptions {
    std::string grid = "33";
    std::string precision = "f64";
    std::string method = "naive";
    std::string boundary = "homogeneous";
    std::string u0 = "1";
    double h = 1e-4;
    double t_end = 0.0; // 0 means one step
    double tol = 1e-8;
    int max_degree = 150;
    int workers = 1;
    std::string out;
    std::string steps;
    std::string ledger;
    bool json = false;
};

struct PropagateOptions {
    std::string matrix;
    std::string psi0;
    double t_end = 1.0;
    double h = 0.0; // 0 means a single step of length t_end
    double tol = 1e-8;
    int max_degree = 150;
    int workers = 1;
    bool hermitian = true;
    std::string out;
    std::string ledger;
    bool json = false;
};

struct VerifyOptions {
    std::vector<std::string> only;
    std::string inject_failure;
    bool json = false;
};

/// "none"/"periodic", "homogeneous", or an expression for Dirichlet data.
BoundaryCondition parse_boundary(const std::string& s);

int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err);
int cmd_solve_combustion(const CombustionOptions& o, std::ostream& out, std::ostream& err);
int cmd_propagate(const PropagateOptions& o, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err);

} // namespace expint::cli
