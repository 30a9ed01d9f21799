#pragma once

#include <string>
#include <vector>

namespace tailtilt {

/// Reads a one-column numeric file: one value per line, optional single
/// header line, LF or CRLF endings, plain or scientific notation. With
/// negate = true every value is sign-flipped at ingestion (left-tail
/// analysis on -X). Throws IngestError on missing files, non-numeric
/// lines past the header, non-finite values, or an empty column.
std::vector<double> read_value_column(const std::string& path, bool negate = false);

}  // namespace tailtilt
