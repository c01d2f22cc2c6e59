#pragma once

#include <chrono>
#include <string>

namespace acinv {

// External verifier invocation. The command template names the annotated
// file through a {file} placeholder and runs under /bin/sh. Exit code 0 is a
// pass (optionally further gated by a pattern the output must match), 126 and
// 127 are treated as spawn problems, anything else is a fail.

struct VerifierResult {
  enum class Status { Pass, Fail, Error, Timeout };
  Status status = Status::Error;
  int exit_code = -1;
  /// Combined stdout and stderr, capped at 64 KiB.
  std::string output;
};

const char* verifier_status_name(VerifierResult::Status s);

VerifierResult run_external_verifier(const std::string& file, const std::string& command_template,
                                     std::chrono::milliseconds timeout = std::chrono::milliseconds(60000),
                                     const std::string& pass_pattern = "");

}  // namespace acinv
