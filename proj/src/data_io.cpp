#include "tailtilt/data_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tailtilt/errors.hpp"

namespace tailtilt {

namespace {

bool parse_double(const std::string& text, double& out) {
    errno = 0;
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || errno == ERANGE) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

}  // namespace

std::vector<double> read_value_column(const std::string& path, bool negate) {
    std::ifstream in(path);
    if (!in) throw IngestError("file not found: " + path);

    std::vector<double> values;
    std::string line;
    std::size_t lineNo = 0;
    bool headerAllowed = true;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        const auto first = trimmed.find_first_not_of(" \t");
        if (first == std::string::npos) continue;  // blank line
        trimmed = trimmed.substr(first);

        double v;
        if (!parse_double(trimmed, v)) {
            if (headerAllowed) {
                headerAllowed = false;  // a single leading header line is fine
                continue;
            }
            std::ostringstream msg;
            msg << path << ":" << lineNo << ": not a numeric value: '" << trimmed << "'";
            throw IngestError(msg.str());
        }
        headerAllowed = false;
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << path << ":" << lineNo << ": non-finite value";
            throw IngestError(msg.str());
        }
        values.push_back(negate ? -v : v);
    }
    if (values.empty()) throw IngestError("no numeric values in " + path);
    return values;
}

}  // namespace tailtilt
