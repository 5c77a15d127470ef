#pragma once

#include <string>

#include "grouprec/trainer.hpp"

namespace grouprec {

// Versioned binary dump of the full training state (parameters, identified
// centers, optimizer moments, generator state). Byte layout is documented in
// the README; resuming from it reproduces the remaining epochs exactly.
void save_checkpoint(const std::string& path, const TrainedModel& model);

TrainedModel load_checkpoint(const std::string& path);

}  // namespace grouprec
