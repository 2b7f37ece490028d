#pragma once

#include <string>
#include <vector>

namespace vitslim {

// Exit codes: 0 success, 1 usage/config error, 2 data/io error,
// 3 numeric failure during training.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace vitslim
