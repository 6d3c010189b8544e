#pragma once

namespace facexai {

// Library version, "major.minor.patch".
const char* version();

}  // namespace facexai
