#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace mgtaudit::testing {

// Compares against tests/fixtures/golden/<name>; MGTAUDIT_UPDATE_GOLDEN=1
// rewrites the file instead.
inline void expect_golden(const std::string& name, const std::string& actual) {
    const std::string path = std::string(MGTAUDIT_SOURCE_DIR) + "/tests/fixtures/golden/" + name;
    if (std::getenv("MGTAUDIT_UPDATE_GOLDEN")) {
        std::ofstream(path, std::ios::binary) << actual;
        return;
    }
    std::ifstream in(path, std::ios::binary);
    ASSERT_TRUE(in) << "missing golden file " << path;
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), actual) << "golden mismatch: " << path;
}

}  // namespace mgtaudit::testing
