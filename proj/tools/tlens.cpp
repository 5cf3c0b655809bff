// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "tlens/cli.hpp"

int main(int argc, char** argv) { return tlens::cli_main(argc, argv); }
