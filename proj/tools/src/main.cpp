// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "mdlab/cli.hpp"

int main(int argc, char** argv) {
  return mdlab::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
