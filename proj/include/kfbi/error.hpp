#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kfbi {

enum class ErrorKind {
  invalid_parameter,
  anisotropic_spacing,
  boundary_escapes_box,
  root_not_found,
  resolution,
  too_coarse,
  length_mismatch,
  singular_system,
  missing_jump,
  size,
  zero_pivot,
  too_small,
  singular_block,
  near_box,
  singular_stencil,
  no_convergence,
  unsupported,
  too_many_workers,
  blow_up,
  config,
  io,
};

std::string_view to_string(ErrorKind kind);

/// All library failures are reported through this type; `kind()` is stable
/// and is what the CLI prints as the machine-readable reason.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace kfbi
