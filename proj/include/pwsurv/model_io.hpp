#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pwsurv/training.hpp"

namespace pwsurv {

inline constexpr int kModelFormatVersion = 1;

/// Serializes a trained model as indented JSON; see docs/model_format.md.
std::string format_model(const TrainedModel& model);
/// Throws ParseError on malformed documents or unsupported versions.
TrainedModel parse_model(std::string_view text);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

/// Per-epoch history as CSV: epoch,train_loss,val_loss.
void format_history(const TrainedModel& model, std::ostream& out);

}  // namespace pwsurv
