#pragma once

namespace schro {

// Short git revision of the source tree at configure time, or "unknown".
const char* git_revision() noexcept;

}  // namespace schro
