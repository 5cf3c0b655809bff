// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace tlens {

// Single entry point behind the `tlens` binary. Exit codes: 0 success,
// 1 configuration or runtime failure (one-line diagnostic on stderr),
// 2 usage errors. Success never writes to stderr.
int cli_main(int argc, const char* const* argv);

}  // namespace tlens
