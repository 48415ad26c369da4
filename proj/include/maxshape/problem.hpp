#pragma once

#include <maxshape/cost.hpp>
#include <maxshape/pde.hpp>

#include <string>

namespace maxshape {

/// Everything that defines the state equation and the pointwise cost.
struct Problem {
    ScalarFunction f;
    VectorFunction grad_f; ///< may be empty
    ScalarFunction u_d;
    VectorFunction grad_u_d; ///< may be empty
    DiffusionLaw law = DiffusionLaw::unit();
    CostSpec cost;
};

/// f = (2 pi^2 + 1) sin(pi x) sin(pi y), u_d = sin(pi x) sin(pi y); the unit
/// square is a global minimiser of both the max-type and the L2 cost.
Problem toy_problem(const DiffusionLaw& law = DiffusionLaw::unit());

/// Selects the load ("manufactured" or "zero"), the target ("sine" or "zero")
/// and the diffusion law by name. Unknown names raise ConfigError.
Problem make_problem(const std::string& load, const std::string& target, const std::string& law);

double manufactured_solution(const Point& x);

} // namespace maxshape
