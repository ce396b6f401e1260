#pragma once

#include <string>
#include <vector>

#include "qecsp/relation.hpp"

namespace qecsp {

namespace text {
std::string tuple_str(const Tuple& t);
std::vector<std::string> split_ws(const std::string& s);
// Plain decimal, no sign, no leading '+'.
int parse_int(const std::string& s);
Tuple parse_tuple(const std::string& s, int arity, int domain);
}  // namespace text

// Dot-joined values from index `from` on.
std::string table_str(const std::vector<int>& v, std::size_t from = 0);

}  // namespace qecsp
