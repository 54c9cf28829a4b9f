#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "dfield/dirichlet_form.hpp"

namespace dfield {

/// Malformed form file. `line()` is 1-based, 0 when the problem is global.
class ParseError : public InputError {
 public:
  ParseError(int line, const std::string& what)
      : InputError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Graph+form text format, one record per line:
//   v <id> <m>        vertex with measure m > 0
//   e <i> <j> <w>     jump weight w >= 0 on the undirected pair {i, j}
//   k <i> <kappa>     killing weight kappa >= 0
//   ref <i> <j>       reference adjacency edge
// Blank lines and '#' comments are ignored. Vertex ids must be exactly 0..n-1.
// When no `ref` record is present the reference adjacency defaults to the jump edges.
DirichletForm read_form(std::istream& in);
DirichletForm read_form_file(const std::string& path);

void write_form(std::ostream& out, const DirichletForm& form);

}  // namespace dfield
