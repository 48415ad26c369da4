#include <maxshape/errors.hpp>
#include <maxshape/problem.hpp>

#include <cmath>
#include <numbers>

namespace maxshape {

namespace {
    constexpr double pi = std::numbers::pi;

    double sine(const Point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); }
    Eigen::Vector2d grad_sine(const Point& x)
    {
        return {pi * std::cos(pi * x.x()) * std::sin(pi * x.y()), pi * std::sin(pi * x.x()) * std::cos(pi * x.y())};
    }
} // namespace

double manufactured_solution(const Point& x) { return sine(x); }

Problem make_problem(const std::string& load, const std::string& target, const std::string& law)
{
    Problem p;
    const double c = 2.0 * pi * pi + 1.0;
    if (load == "manufactured") {
        p.f = [c](const Point& x) { return c * sine(x); };
        p.grad_f = [c](const Point& x) -> Eigen::Vector2d { return c * grad_sine(x); };
    } else if (load == "zero") {
        p.f = [](const Point&) { return 0.0; };
        p.grad_f = [](const Point&) -> Eigen::Vector2d { return Eigen::Vector2d::Zero(); };
    } else {
        throw ConfigError("unknown load '" + load + "'");
    }

    if (target == "sine") {
        p.u_d = sine;
        p.grad_u_d = grad_sine;
    } else if (target == "zero") {
        p.u_d = [](const Point&) { return 0.0; };
        p.grad_u_d = [](const Point&) -> Eigen::Vector2d { return Eigen::Vector2d::Zero(); };
    } else {
        throw ConfigError("unknown target '" + target + "'");
    }

    p.law = DiffusionLaw::by_name(law);
    p.law.validate();
    p.cost = CostSpec::tracking(p.u_d, p.grad_u_d);
    return p;
}

Problem toy_problem(const DiffusionLaw& law)
{
    Problem p = make_problem("manufactured", "sine", "unit");
    p.law = law;
    return p;
}

} // namespace maxshape
