#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace argora {

enum class errc {
  duplicate_id,
  missing_parent,
  cycle_detected,
  score_out_of_range,
  depth_exceeded,
  invalid_level,
  invalid_polarity,
  unknown_node,
  root_has_no_edge,
  already_deleted,
  length_mismatch,
  empty_family,
  no_non_root_nodes,
  support_mismatch,
  non_positive_mass,
  empty_dataset,
  no_disagreement,
  no_valid_instances,
  provider_failure,
  empty_proposal,
  review_rejected,
  incomplete_bundle,
  parse_error,
  config_error,
};

/// All engine failures are reported as an Error carrying a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace argora
