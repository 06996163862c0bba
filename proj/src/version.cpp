#include "schro/version.hpp"

namespace schro {

const char* git_revision() noexcept { return SCHRO_GIT_REVISION; }

}  // namespace schro
