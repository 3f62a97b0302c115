#pragma once

#include <string>

#include "dawmr/metrics.hpp"
#include "dawmr/recursive.hpp"

namespace dawmr {

// Text run configuration: one "key = value" per line, '#' starts a comment.
// Unknown keys are rejected and every value is validated when parsed.
struct RunConfig {
  RecursiveConfig recursive;
  bool augment = true;
  std::int64_t tile = 32;
  EvaluationOptions evaluation;

  RunConfig();

  // Applies one key; throws ValidationError naming the key on bad input.
  void set(const std::string& key, const std::string& value);
  // Cross-key checks, including a stated feature_dims against the derived one.
  void validate() const;
  // Canonical dump that parses back to an identical config.
  std::string to_text() const;

  std::size_t feature_dims() const;

 private:
  std::size_t stated_feature_dims_ = 0;
};

RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

}  // namespace dawmr
