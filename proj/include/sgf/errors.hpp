// Copyright (c) 2026 The sgf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sgf {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files (TSV, JSON, JSONL, CSV).
class ParseError : public Error {
public:
    using Error::Error;
};

// Well-formed input that violates a contract (unknown ids, bad ranges,
// duplicate keys, scope too narrow, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Querying a structure store for a complexity that was never enumerated.
class NotEnumeratedError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Enumeration exceeded the configured ceiling. Never silently truncated.
class OverflowError : public Error {
public:
    using Error::Error;
};

// A broken internal invariant. Reaching this is a bug, not bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace sgf
