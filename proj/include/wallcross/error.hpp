#pragma once

#include <stdexcept>
#include <string>

namespace wallcross {

// Machine-readable error codes; the CLI maps these 1:1 into reports.
enum class errc {
  context_mismatch,
  composition_undefined,
  config_error,
  cone_error,
  degenerate_charge,
  ray_on_boundary,
  ambiguous_order,
  no_solution,
  domain_error,
  singular_point,
  singular_base,
  not_positive_definite,
  constraint_violation,
  xi_near_ray,
  quadrature_error,
  no_convergence,
  wall_error,
  inconsistency,
  io_error,
  bad_config,
  unknown_command,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw Error(code, what);
}

} // namespace wallcross
