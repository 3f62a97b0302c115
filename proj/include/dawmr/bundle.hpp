#pragma once

#include <string>

#include "dawmr/recursive.hpp"

namespace dawmr {

// Writes `model` into directory `dir`: a text manifest ("manifest.txt",
// one "key = value" per line) naming per-iteration dictionary (.dwdc), MLP
// (.dwmp) and normalizer (.dwnm) files, plus LED masks as segmentation
// volumes.
void save_model(const DawmrModel& model, const std::string& dir);
DawmrModel load_model(const std::string& dir);

}  // namespace dawmr
