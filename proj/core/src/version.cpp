#include "facexai/version.hpp"

namespace facexai {

const char* version() { return FACEXAI_VERSION; }

}  // namespace facexai
