#pragma once

#include <string>

#include "csa/ast.hpp"

namespace csa::ast {

// Recursive-descent parsers for a practical subset of each grammar.
// Node types follow the usual concrete-syntax production names; anonymous
// punctuation/keyword tokens are dropped. Identifier leaves keep their
// text as node_type and carry is_identifier.
Ast parse_source(const std::string& code, Lang lang);

Ast parse_python(const std::string& code, const std::string& origin_id = "");
Ast parse_java(const std::string& code, const std::string& origin_id = "");

// First statement of a python function body when it is a plain string.
std::string python_docstring(const std::string& code);

} // namespace csa::ast
