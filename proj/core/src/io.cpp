#include "cmrkit/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace cmrkit {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": not a number: '" + s + "'");
  }
}

struct CurveKey {
  std::string label;
  double ratio;
  bool operator<(const CurveKey& o) const {
    return label < o.label || (label == o.label && ratio < o.ratio);
  }
};

CurveFormat detect_format(const std::string& path, CurveFormat format) {
  if (format != CurveFormat::auto_detect) return format;
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "jsonl" || ext == "ndjson" || ext == "json") {
    return CurveFormat::jsonl;
  }
  return CurveFormat::csv;
}

std::vector<TrainingCurve> ingest_csv(const std::string& path,
                                      double tokens_per_unit) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);

  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  ++lineno;
  {
    const auto header = split_csv(line);
    const std::vector<std::string> expected = {
        "model_label", "ratio", "kind", "t_tokens", "loss", "baseline_loss"};
    if (header != expected) {
      throw ParseError(path + ":1: bad header, expected "
                       "model_label,ratio,kind,t_tokens,loss,baseline_loss");
    }
  }

  std::vector<CurveKey> order;
  std::map<CurveKey, TrainingCurve> curves;
  std::map<CurveKey, std::pair<bool, bool>> baseline_seen;

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto cols = split_csv(line);
    if (cols.size() != 6) {
      throw ParseError(where + ": expected 6 columns, got " +
                       std::to_string(cols.size()));
    }
    const std::string& label = cols[0];
    const double ratio = parse_double(cols[1], where);
    const std::string& kind_str = cols[2];
    const double t_tokens = parse_double(cols[3], where);
    const double loss = parse_double(cols[4], where);
    const double baseline = parse_double(cols[5], where);

    DeltaKind kind;
    if (kind_str == "gen") {
      kind = DeltaKind::general;
    } else if (kind_str == "dom") {
      kind = DeltaKind::domain;
    } else {
      throw ParseError(where + ": kind must be 'gen' or 'dom', got '" +
                       kind_str + "'");
    }

    const CurveKey key{label, ratio};
    auto it = curves.find(key);
    if (it == curves.end()) {
      TrainingCurve c;
      c.model_label = label;
      c.ratio = ratio;
      it = curves.emplace(key, std::move(c)).first;
      order.push_back(key);
      baseline_seen[key] = {false, false};
    }
    TrainingCurve& c = it->second;
    auto& seen = baseline_seen[key];

    bool& seen_kind = kind == DeltaKind::general ? seen.first : seen.second;
    double& base = kind == DeltaKind::general ? c.baseline_gen : c.baseline_dom;
    if (seen_kind && base != baseline) {
      throw ParseError(where + ": conflicting baseline_loss for run '" + label +
                       "' ratio " + cols[1]);
    }
    base = baseline;
    seen_kind = true;

    auto& samples = kind == DeltaKind::general ? c.gen_samples : c.dom_samples;
    samples.push_back({t_tokens / tokens_per_unit, loss});
  }

  std::vector<TrainingCurve> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    TrainingCurve& c = curves[key];
    validate(c);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<TrainingCurve> ingest_jsonl(const std::string& path,
                                        double tokens_per_unit) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);

  std::vector<TrainingCurve> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    try {
      TrainingCurve c;
      c.model_label = obj.at("model_label").get<std::string>();
      c.ratio = obj.at("ratio").get<double>();
      c.baseline_gen = obj.at("baseline_gen").get<double>();
      c.baseline_dom = obj.at("baseline_dom").get<double>();
      for (const auto& pair : obj.at("gen")) {
        c.gen_samples.push_back(
            {pair.at(0).get<double>() / tokens_per_unit, pair.at(1).get<double>()});
      }
      for (const auto& pair : obj.at("dom")) {
        c.dom_samples.push_back(
            {pair.at(0).get<double>() / tokens_per_unit, pair.at(1).get<double>()});
      }
      validate(c);
      out.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

double units_to_tokens(double units, double tokens_per_unit) {
  const double v = units * tokens_per_unit;
  if (v / tokens_per_unit == units) return v;
  const double up = std::nextafter(v, std::numeric_limits<double>::infinity());
  if (up / tokens_per_unit == units) return up;
  const double dn = std::nextafter(v, -std::numeric_limits<double>::infinity());
  if (dn / tokens_per_unit == units) return dn;
  return v;
}

std::vector<TrainingCurve> ingest_curves(const std::string& path,
                                         double tokens_per_unit,
                                         CurveFormat format) {
  if (!(tokens_per_unit > 0.0)) {
    throw std::invalid_argument("tokens_per_unit must be positive");
  }
  switch (detect_format(path, format)) {
    case CurveFormat::jsonl:
      return ingest_jsonl(path, tokens_per_unit);
    default:
      return ingest_csv(path, tokens_per_unit);
  }
}

void write_csv(const std::vector<TrainingCurve>& curves,
               const std::string& path, double tokens_per_unit) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << "model_label,ratio,kind,t_tokens,loss,baseline_loss\n";
  for (const auto& c : curves) {
    for (DeltaKind kind : {DeltaKind::general, DeltaKind::domain}) {
      const char* kind_str = kind == DeltaKind::general ? "gen" : "dom";
      const double baseline = baseline_of(c, kind);
      for (const auto& s : samples_of(c, kind)) {
        out << c.model_label << ',' << fmt_double(c.ratio) << ',' << kind_str
            << ',' << fmt_double(units_to_tokens(s.t, tokens_per_unit)) << ','
            << fmt_double(s.loss) << ',' << fmt_double(baseline) << '\n';
      }
    }
  }
}

void write_jsonl(const std::vector<TrainingCurve>& curves,
                 const std::string& path, double tokens_per_unit) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  for (const auto& c : curves) {
    nlohmann::ordered_json obj;
    obj["model_label"] = c.model_label;
    obj["ratio"] = c.ratio;
    obj["baseline_gen"] = c.baseline_gen;
    obj["baseline_dom"] = c.baseline_dom;
    auto dump = [&](const std::vector<LossSample>& samples) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& s : samples) {
        arr.push_back({units_to_tokens(s.t, tokens_per_unit), s.loss});
      }
      return arr;
    };
    obj["gen"] = dump(c.gen_samples);
    obj["dom"] = dump(c.dom_samples);
    out << obj.dump() << '\n';
  }
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace cmrkit
