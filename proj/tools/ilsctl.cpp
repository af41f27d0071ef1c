// SPDX-License-Identifier: Apache-2.0
#include "ils/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ils::run(argc, argv, std::cout, std::cerr); }
