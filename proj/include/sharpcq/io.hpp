#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "sharpcq/relational.hpp"

namespace sharpcq {

// `NAME(V1,...,Vn) :- atom1, ..., atomm.` Identifiers starting with an
// uppercase letter are variables; lowercase identifiers, integers and quoted
// tokens are constants. `%` starts a comment. Throws ParseError,
// ArityMismatch, FreeVarNotInBody.
Query parse_query(std::string_view text);
Query read_query_file(const std::filesystem::path& path);

// Inverse of parse_query: constants that would not lex back as constants are
// double-quoted.
std::string print_query(const Query& q);
std::string print_atom(const Atom& a);
std::string print_vars(const VarSet& vars);

// Facts text: `rel(c1,...,cn).` per fact; duplicates collapse.
Database parse_facts(std::string_view text);
// A facts file, or a directory holding one headerless `<rel>.csv` per relation.
Database parse_database(const std::filesystem::path& path);

void write_facts(const Database& db, std::ostream& out);
void write_csv_directory(const Database& db, const std::filesystem::path& dir);

}  // namespace sharpcq
