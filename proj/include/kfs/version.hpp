#pragma once

#ifndef KFS_VERSION
#define KFS_VERSION "0.1.0"
#endif

namespace kfs {
inline constexpr const char* version = KFS_VERSION;
}
