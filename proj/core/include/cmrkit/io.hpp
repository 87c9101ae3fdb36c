#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cmrkit/curves.hpp"

namespace cmrkit {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CurveFormat { csv, jsonl, auto_detect };

// Reads curves from a CSV (long format, one sample per row) or JSONL (one run
// per line) file. Training volume in the file is raw tokens and is rescaled
// to units at ingest. Every curve is validated; parse failures carry the line
// number. auto_detect picks the format from the file extension.
std::vector<TrainingCurve> ingest_curves(
    const std::string& path, double tokens_per_unit = kDefaultTokensPerUnit,
    CurveFormat format = CurveFormat::auto_detect);

void write_csv(const std::vector<TrainingCurve>& curves,
               const std::string& path,
               double tokens_per_unit = kDefaultTokensPerUnit);

void write_jsonl(const std::vector<TrainingCurve>& curves,
                 const std::string& path,
                 double tokens_per_unit = kDefaultTokensPerUnit);

// Raw-token value that recovers `units` exactly when divided back by
// tokens_per_unit, when such a double exists (keeps serialize/ingest
// round trips bit-exact).
double units_to_tokens(double units, double tokens_per_unit);

// FNV-1a 64-bit digest of a file's bytes, as fixed-width hex.
std::string file_digest(const std::string& path);

}  // namespace cmrkit
