#pragma once

#include <functional>
#include <string>

namespace mollow {

// Non-fatal numerical warnings (truncation health, clipped negative mass).
// The default sink writes one line to stderr.
using WarningSink = std::function<void(const std::string&)>;

void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace mollow
