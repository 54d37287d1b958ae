// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "ibp/cli.hpp"

int main(int argc, char** argv) {
  return ibp::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
