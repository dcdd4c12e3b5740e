#ifndef XRAYPHG_ERRORS_HPP
#define XRAYPHG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace xrayphg {

/// Evaluation requested at (or too close to) a pole of a meromorphic quantity.
struct pole_error : std::domain_error {
    explicit pole_error(const std::string& what) : std::domain_error(what) {}
};

/// An integral does not converge for the requested exponent range.
struct integrability_error : std::domain_error {
    explicit integrability_error(const std::string& what) : std::domain_error(what) {}
};

/// A geodesic failed to leave the manifold within the configured max time.
struct trapping_error : std::runtime_error {
    explicit trapping_error(const std::string& what) : std::runtime_error(what) {}
};

/// Glancing-chart coordinates requested outside their validity neighborhood.
struct out_of_chart_error : std::domain_error {
    explicit out_of_chart_error(const std::string& what) : std::domain_error(what) {}
};

/// Successive quadrature refinements failed to settle below tolerance.
struct nonconvergence_error : std::runtime_error {
    explicit nonconvergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// Least-squares / Laurent fit failed (conditioning, rank, or residual).
struct fit_error : std::runtime_error {
    explicit fit_error(const std::string& what) : std::runtime_error(what) {}
};

/// Continuation would need more derivatives than the profile provides.
struct smoothness_error : std::domain_error {
    explicit smoothness_error(const std::string& what) : std::domain_error(what) {}
};

/// Operation invoked on a model it does not apply to.
struct model_mismatch_error : std::logic_error {
    explicit model_mismatch_error(const std::string& what) : std::logic_error(what) {}
};

/// Bad scenario configuration (maps to CLI exit code 2).
struct config_error : std::invalid_argument {
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace xrayphg

#endif
