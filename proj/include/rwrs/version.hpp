#pragma once

#define RWRS_VERSION_MAJOR 0
#define RWRS_VERSION_MINOR 1
#define RWRS_VERSION_PATCH 0
#define RWRS_VERSION_STRING "0.1.0"

namespace rwrs {
inline const char* version() { return RWRS_VERSION_STRING; }
}
