#pragma once

#include <string>

#include "acinv/cst.hpp"

namespace acinv::c {

/// Parse a program in the C subset. Throws ParseError (with the offending
/// span) for anything outside the subset; an empty input yields an Ast with
/// empty declaration and function lists.
///
/// for-loops are desugared to init + while(cond){body; step} and do-while to a
/// guard-after-body while; both keep the original keyword span and LoopForm.
Ast parse_program(const std::string& source);

}  // namespace acinv::c
