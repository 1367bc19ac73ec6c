#include "wallcross/error.hpp"

namespace wallcross {

const char* errc_name(errc c) {
  switch (c) {
    case errc::context_mismatch: return "CONTEXT_MISMATCH";
    case errc::composition_undefined: return "COMPOSITION_UNDEFINED";
    case errc::config_error: return "CONFIG_ERROR";
    case errc::cone_error: return "CONE_ERROR";
    case errc::degenerate_charge: return "DEGENERATE_CHARGE";
    case errc::ray_on_boundary: return "RAY_ON_BOUNDARY";
    case errc::ambiguous_order: return "AMBIGUOUS_ORDER";
    case errc::no_solution: return "NO_SOLUTION";
    case errc::domain_error: return "DOMAIN_ERROR";
    case errc::singular_point: return "SINGULAR_POINT";
    case errc::singular_base: return "SINGULAR_BASE";
    case errc::not_positive_definite: return "NOT_POSITIVE_DEFINITE";
    case errc::constraint_violation: return "CONSTRAINT_VIOLATION";
    case errc::xi_near_ray: return "XI_NEAR_RAY";
    case errc::quadrature_error: return "QUADRATURE_ERROR";
    case errc::no_convergence: return "NO_CONVERGENCE";
    case errc::wall_error: return "WALL_ERROR";
    case errc::inconsistency: return "INCONSISTENCY";
    case errc::io_error: return "IO_ERROR";
    case errc::bad_config: return "BAD_CONFIG";
    case errc::unknown_command: return "UNKNOWN_COMMAND";
  }
  return "UNKNOWN";
}

} // namespace wallcross
