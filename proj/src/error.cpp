#include "kfbi/error.hpp"

namespace kfbi {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::anisotropic_spacing: return "anisotropic-spacing";
    case ErrorKind::boundary_escapes_box: return "boundary-escapes-box";
    case ErrorKind::root_not_found: return "root-not-found";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::too_coarse: return "too-coarse";
    case ErrorKind::length_mismatch: return "length-mismatch";
    case ErrorKind::singular_system: return "singular-system";
    case ErrorKind::missing_jump: return "missing-jump";
    case ErrorKind::size: return "size";
    case ErrorKind::zero_pivot: return "zero-pivot";
    case ErrorKind::too_small: return "too-small";
    case ErrorKind::singular_block: return "singular-block";
    case ErrorKind::near_box: return "near-box";
    case ErrorKind::singular_stencil: return "singular-stencil";
    case ErrorKind::no_convergence: return "no-convergence";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::too_many_workers: return "too-many-workers";
    case ErrorKind::blow_up: return "blow-up";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace kfbi
