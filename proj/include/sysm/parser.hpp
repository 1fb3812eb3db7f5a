#pragma once

#include <stdexcept>
#include <string>

#include "sysm/syntax.hpp"

namespace sysm {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error(msg + " at " + std::to_string(l) + ":" + std::to_string(c)),
        line(l), col(c) {}
};

// Reserved words: lam tylam comp ret act letc lete seqc seqe fix capp if then
// else true false forall exists on appf TT FF b unt Pi All PiC tcmp sym.
// Identifiers of shape l<digits> / tid<digits> are location / thread-id
// literals; -inf is the pre-initial time marker.
ExprP parse_expr(const std::string& text);
CompP parse_comp(const std::string& text);
FormP parse_formula(const std::string& text);
TypeP parse_type(const std::string& text);
ClosedCompType parse_comp_type(const std::string& text);
SymP parse_sym(const std::string& text);  // body of sym{...}

struct Program {
  CompP c;  // exactly one of c / e is set
  ExprP e;
};

// Whole-program entry point: accepts a computation or an expression and
// requires the result to be closed (unbound variables are an error).
Program parse_program(const std::string& text);

}  // namespace sysm
