#pragma once

#include <string>

#include "fdb/catalog.hpp"

namespace fdb {

/// Parses the textual query format:
///
///   RELATIONS R1(A,B); R2(C,D)
///   WHERE R1.A = R2.C AND R1.B = 5
///   PROJECT R1.A, R2.D
///
/// WHERE and PROJECT are optional; a missing PROJECT keeps every
/// attribute.  Attribute pairs join with '=' only; attribute-constant
/// comparisons take =, !=, <, <=, >, >=.  Constants are integers, bare
/// words, or double-quoted strings ("01" and "5" stay strings).  '#'
/// starts a comment; line breaks are ordinary whitespace.  Attribute
/// references must name a declared relation and column.  ParseError
/// positions are line:column into the text.
Query parse_query_text(const std::string& text);

/// Reads and parses a query file; the path prefixes error positions.
Query load_query_file(const std::string& path);

/// Textual form accepted by parse_query_text.  Inverse of parsing for
/// queries whose atoms read the relation they are named after.
std::string render_query_text(const Query& q);

}  // namespace fdb
