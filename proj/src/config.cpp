#include "config.hpp"

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace gibbsfit {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

json parse_scalar(const std::string& text, std::size_t line_no) {
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    return text.substr(1, text.size() - 2);
  }
  if (text == "true") return true;
  if (text == "false") return false;
  {
    long long iv = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), iv);
    if (ec == std::errc{} && ptr == text.data() + text.size()) return iv;
  }
  {
    double dv = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), dv);
    if (ec == std::errc{} && ptr == text.data() + text.size()) return dv;
  }
  raise(ErrorCode::parse, "config line " + std::to_string(line_no) +
                              ": cannot parse value '" + text + "'");
}

json parse_value(const std::string& text, std::size_t line_no) {
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') {
      raise(ErrorCode::parse,
            "config line " + std::to_string(line_no) + ": unterminated array");
    }
    json arr = json::array();
    const std::string inner = text.substr(1, text.size() - 2);
    std::size_t start = 0;
    while (start <= inner.size()) {
      const std::size_t pos = inner.find(',', start);
      const std::string item =
          trim(pos == std::string::npos ? inner.substr(start)
                                        : inner.substr(start, pos - start));
      if (!item.empty()) arr.push_back(parse_scalar(item, line_no));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return arr;
  }
  return parse_scalar(text, line_no);
}

json toml_subset_to_json(const std::string& text) {
  json root = json::object();
  json* section = &root;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        raise(ErrorCode::parse, "config line " + std::to_string(line_no) +
                                    ": malformed section header");
      }
      const std::string name = trim(line.substr(1, line.size() - 2));
      section = &root[name];
      if (section->is_null()) *section = json::object();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::parse, "config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      raise(ErrorCode::parse, "config line " + std::to_string(line_no) +
                                  ": empty key or value");
    }
    (*section)[key] = parse_value(value, line_no);
  }
  return root;
}

double require_number(const json& obj, const std::string& section,
                      const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    raise(ErrorCode::parse,
          "config: [" + section + "] needs numeric key '" + key + "'");
  }
  return obj[key].get<double>();
}

std::vector<double> number_array(const json& value, const std::string& where) {
  if (!value.is_array()) {
    raise(ErrorCode::parse, "config: " + where + " must be an array");
  }
  std::vector<double> out;
  for (const auto& item : value) {
    if (!item.is_number()) {
      raise(ErrorCode::parse, "config: " + where + " must hold numbers");
    }
    out.push_back(item.get<double>());
  }
  return out;
}

Window window_from(const json& value, const std::string& where) {
  const auto v = number_array(value, where);
  if (v.size() != 4) {
    raise(ErrorCode::parse,
          "config: " + where + " must be [xmin, xmax, ymin, ymax]");
  }
  return Window(v[0], v[1], v[2], v[3]);
}

ModelSpec model_from_json(const json& m) {
  if (!m.contains("family") || !m["family"].is_string()) {
    raise(ErrorCode::parse, "config: [model] needs a 'family' string");
  }
  const auto family = family_from_name(m["family"].get<std::string>());
  if (!family) {
    raise(ErrorCode::parse,
          "config: unknown family '" + m["family"].get<std::string>() + "'");
  }
  switch (*family) {
    case Family::poisson:
      return ModelSpec::poisson();
    case Family::overlap_area:
      return ModelSpec::overlap_area(require_number(m, "model", "R"));
    case Family::geyer_triplet:
      return ModelSpec::geyer_triplet(require_number(m, "model", "R"));
    case Family::area_interaction:
      return ModelSpec::area_interaction(require_number(m, "model", "R"));
    case Family::strauss_disc:
      return ModelSpec::strauss_disc(require_number(m, "model", "mark_max"));
    case Family::multi_strauss:
    case Family::knn_multi_strauss: {
      const int marks = m.contains("marks")
                            ? static_cast<int>(require_number(m, "model", "marks"))
                            : 1;
      std::vector<PairGrid> grids;
      for (int m1 = 1; m1 <= marks; ++m1) {
        for (int m2 = m1; m2 <= marks; ++m2) {
          const std::string key = "ranges_" + std::to_string(m1) + "_" +
                                  std::to_string(m2);
          if (!m.contains(key)) {
            raise(ErrorCode::parse, "config: [model] needs '" + key + "'");
          }
          grids.push_back(PairGrid{number_array(m[key], "[model] " + key)});
        }
      }
      if (*family == Family::multi_strauss) {
        return ModelSpec::multi_strauss(marks, std::move(grids));
      }
      return ModelSpec::knn_multi_strauss(
          marks, std::move(grids),
          static_cast<int>(require_number(m, "model", "k")));
    }
  }
  raise(ErrorCode::parse, "config: unsupported family");
}

}  // namespace

FileConfig parse_config(const std::string& text, bool is_json) {
  json root;
  if (is_json) {
    root = json::parse(text, nullptr, false);
    if (root.is_discarded()) {
      raise(ErrorCode::parse, "config: invalid JSON");
    }
  } else {
    root = toml_subset_to_json(text);
  }
  if (!root.contains("model")) {
    raise(ErrorCode::parse, "config: missing [model] section");
  }

  FileConfig cfg(model_from_json(root["model"]));
  const json& m = root["model"];
  if (m.contains("theta")) {
    cfg.theta = number_array(m["theta"], "[model] theta");
    if (cfg.theta->size() !=
        static_cast<std::size_t>(cfg.model.dimension())) {
      raise(ErrorCode::parse,
            "config: theta has " + std::to_string(cfg.theta->size()) +
                " components, the model needs " +
                std::to_string(cfg.model.dimension()));
    }
  }
  if (root.contains("data") && root["data"].contains("window")) {
    cfg.data_window = window_from(root["data"]["window"], "[data] window");
  }
  if (root.contains("fit")) {
    const json& f = root["fit"];
    if (f.contains("dvee")) cfg.dvee = f["dvee"].get<double>();
    if (f.contains("cell")) cfg.cell = f["cell"].get<double>();
    if (f.contains("level")) cfg.level = f["level"].get<double>();
    if (f.contains("grid")) {
      const auto g = number_array(f["grid"], "[fit] grid");
      if (g.size() != 2) {
        raise(ErrorCode::parse, "config: [fit] grid must be [nx, ny]");
      }
      cfg.grid_nx = static_cast<int>(g[0]);
      cfg.grid_ny = static_cast<int>(g[1]);
    }
    if (f.contains("mark_nodes")) {
      cfg.mark_nodes = f["mark_nodes"].get<int>();
    }
    if (f.contains("threads")) cfg.threads = f["threads"].get<int>();
  }
  if (root.contains("simulate")) {
    const json& s = root["simulate"];
    if (s.contains("window")) {
      cfg.sim_window = window_from(s["window"], "[simulate] window");
    }
    if (s.contains("steps")) cfg.steps = s["steps"].get<long long>();
    if (s.contains("burn_in")) cfg.burn_in = s["burn_in"].get<long long>();
    if (s.contains("seed")) cfg.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("p_birth")) cfg.p_birth = s["p_birth"].get<double>();
    if (s.contains("p_death")) cfg.p_death = s["p_death"].get<double>();
    if (s.contains("p_move")) cfg.p_move = s["p_move"].get<double>();
  }
  cfg.echo_json = root.dump();
  return cfg;
}

FileConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const bool is_json =
      path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return parse_config(buffer.str(), is_json);
}

}  // namespace gibbsfit
