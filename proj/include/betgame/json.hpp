#pragma once

#include <json.hpp>

namespace betgame {

// Ordered JSON everywhere: serialized artifacts must be byte-stable.
using Json = nlohmann::ordered_json;

} // namespace betgame
