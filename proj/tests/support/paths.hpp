#pragma once

#include <string>

#ifndef SELNOISE_DATA_DIR
#define SELNOISE_DATA_DIR "data"
#endif

namespace selnoise::test_support {

inline std::string data_path(const std::string& name) { return std::string(SELNOISE_DATA_DIR) + "/" + name; }

}  // namespace selnoise::test_support
