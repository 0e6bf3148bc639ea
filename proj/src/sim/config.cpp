#include "mtoa/sim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "mtoa/error.hpp"

namespace mtoa::sim {

std::string_view to_string(Scheme scheme) {
    return scheme == Scheme::kMtoaL ? "mtoa-l" : "mtoa-g";
}

Scheme parse_scheme(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "mtoa-l") return Scheme::kMtoaL;
    if (lower == "mtoa-g") return Scheme::kMtoaG;
    throw ConfigError("scheme must be \"mtoa-l\" or \"mtoa-g\", got \"" + std::string(text) + "\"");
}

void NetworkConfig::validate() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (horizon < 1) throw ConfigError("T must be >= 1");
    if (null_actions < 1) throw ConfigError("L must be >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1]");
    if (!(q_threshold >= 0.0) || !std::isfinite(q_threshold)) throw ConfigError("q_th must be >= 0");
    if (reset_window && *reset_window < 1) throw ConfigError("m_window must be >= 1 or unbounded");
}

}  // namespace mtoa::sim
