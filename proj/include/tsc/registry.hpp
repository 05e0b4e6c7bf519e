#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tsc/classifier.hpp"

namespace tsc {

/// Candidate budget the registry gives the shapelet transform (also inside
/// cote-lite). Full enumeration is kept available through StOptions.
inline constexpr std::size_t kRegistryShapeletBudget = 20000;

/// Names accepted by make_classifier, in a fixed order.
const std::vector<std::string>& classifier_names();

/// Fresh, unfitted classifier. Throws ParameterError naming the registry for
/// an unknown name.
std::unique_ptr<Classifier> make_classifier(const std::string& name, std::uint64_t seed = 0);

}  // namespace tsc
