// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgf/cli.hpp"

int main(int argc, char** argv) {
    return sgf::cli::run(argc, argv);
}
