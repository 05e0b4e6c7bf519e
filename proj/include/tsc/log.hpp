#pragma once

#include <string_view>

namespace tsc {

/// Writes "warning: <message>" to stderr unless warnings are muted.
void warn(std::string_view message);

void set_warnings_enabled(bool enabled);
bool warnings_enabled();

}  // namespace tsc
