#include "dsgd/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dsgd/trainer.hpp"

namespace dsgd {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  double out = 0.0;
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || end != v.data() + v.size() || !std::isfinite(out)) bad_value(key, text, "a number");
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  Int out{};
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || end != v.data() + v.size()) bad_value(key, text, "an integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, text, "a boolean");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T, class Fmt>
std::string join(const std::vector<T>& xs, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt(xs[i]);
  return out;
}

std::string to_string(DataSource s) { return s == DataSource::csv ? "csv" : "blobs"; }
std::string to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::ring: return "ring";
    case TopologyKind::complete: return "complete";
    case TopologyKind::file: return "file";
  }
  return "ring";
}

struct Field {
  std::function<void(RunConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Ordered: serialization walks this table, so its order is the file order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"model.kind",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          try {
            c.model_kind = parse_model_kind(trim(v));
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
          }
        },
        [](const RunConfig& c) { return to_string(c.model_kind); }}},
      {"model.hidden",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.hidden = parse_int<std::size_t>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.hidden); }}},

      {"data.source",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          const auto s = trim(v);
          if (s == "blobs") c.data.source = DataSource::blobs;
          else if (s == "csv") c.data.source = DataSource::csv;
          else bad_value(k, v, "blobs or csv");
        },
        [](const RunConfig& c) { return to_string(c.data.source); }}},
      {"data.classes",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.data.classes = parse_int<int>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.data.classes); }}},
      {"data.per_class",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.data.per_class = parse_int<std::size_t>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.data.per_class); }}},
      {"data.dim",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.data.dim = parse_int<std::size_t>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.data.dim); }}},
      {"data.spread",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.data.spread = parse_real(k, v); },
        [](const RunConfig& c) { return format_real(c.data.spread); }}},
      {"data.seed",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.data.seed = parse_int<std::uint64_t>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.data.seed); }}},
      {"data.csv_path",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.data.csv_path = trim(v); },
        [](const RunConfig& c) { return c.data.csv_path; }}},
      {"data.alpha",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.data.alpha = parse_real(k, v); },
        [](const RunConfig& c) { return format_real(c.data.alpha); }}},

      {"topology.kind",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          const auto s = trim(v);
          if (s == "ring") c.topology.kind = TopologyKind::ring;
          else if (s == "complete") c.topology.kind = TopologyKind::complete;
          else if (s == "file") c.topology.kind = TopologyKind::file;
          else bad_value(k, v, "ring, complete or file");
        },
        [](const RunConfig& c) { return to_string(c.topology.kind); }}},
      {"topology.agents",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.topology.agents = parse_int<std::size_t>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.topology.agents); }}},
      {"topology.path",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.topology.path = trim(v); },
        [](const RunConfig& c) { return c.topology.path; }}},

      {"optimizer.lr",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.optimizer.base_lr = parse_real(k, v); },
        [](const RunConfig& c) { return format_real(c.optimizer.base_lr); }}},
      {"optimizer.momentum",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.optimizer.momentum = parse_real(k, v); },
        [](const RunConfig& c) { return format_real(c.optimizer.momentum); }}},
      {"optimizer.weight_decay",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.optimizer.weight_decay = parse_real(k, v); },
        [](const RunConfig& c) { return format_real(c.optimizer.weight_decay); }}},
      {"optimizer.milestones",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.optimizer.milestones.clear();
          for (const auto& item : split_list(v)) c.optimizer.milestones.push_back(parse_int<int>(k, item));
        },
        [](const RunConfig& c) { return join(c.optimizer.milestones, [](int m) { return std::to_string(m); }); }}},
      {"optimizer.decay_factor",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.optimizer.decay_factor = parse_real(k, v); },
        [](const RunConfig& c) { return format_real(c.optimizer.decay_factor); }}},
      {"optimizer.decay_biases",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.optimizer.decay_biases = parse_bool(k, v); },
        [](const RunConfig& c) { return std::string(c.optimizer.decay_biases ? "true" : "false"); }}},

      {"schedule.kind",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          try {
            c.schedule.kind = parse_schedule_kind(trim(v));
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
          }
        },
        [](const RunConfig& c) { return to_string(c.schedule.kind); }}},
      {"schedule.initial",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.schedule.initial = parse_real(k, v); },
        [](const RunConfig& c) { return format_real(c.schedule.initial); }}},
      {"schedule.growth",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.schedule.growth = parse_real(k, v); },
        [](const RunConfig& c) { return format_real(c.schedule.growth); }}},
      {"schedule.period",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.schedule.period = parse_int<int>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.schedule.period); }}},
      {"schedule.t_max",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.schedule.t_max = parse_int<int>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.schedule.t_max); }}},

      {"run.epochs",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.epochs = parse_int<int>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.epochs); }}},
      {"run.batch_size",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.batch_size = parse_int<std::size_t>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.batch_size); }}},
      {"run.eval_every",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.eval_every = parse_int<int>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.eval_every); }}},
      {"run.seeds",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.seeds.clear();
          for (const auto& item : split_list(v)) c.seeds.push_back(parse_int<std::uint64_t>(k, item));
        },
        [](const RunConfig& c) { return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }); }}},
      {"run.threads",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.threads = parse_int<std::size_t>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.threads); }}},
      {"run.jobs",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.jobs = parse_int<std::size_t>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.jobs); }}},
      {"run.verbose",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.verbose = parse_bool(k, v); },
        [](const RunConfig& c) { return std::string(c.verbose ? "true" : "false"); }}},
      {"run.output",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.output = trim(v); },
        [](const RunConfig& c) { return c.output; }}},
  };
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

RunConfig desk_preset() {
  RunConfig c;
  c.model_kind = ModelKind::mlp;
  c.hidden = 64;
  c.data = DataConfig{};
  c.topology = TopologyConfig{};
  c.optimizer.base_lr = 0.01;
  c.optimizer.momentum = 0.9;
  c.optimizer.weight_decay = 1e-4;
  c.optimizer.milestones = {50, 75};
  c.optimizer.decay_factor = 0.1;
  c.optimizer.decay_biases = true;
  c.schedule.kind = ScheduleKind::exponential;
  c.schedule.initial = 0.1;
  c.schedule.growth = 1.0275;
  c.schedule.period = 1;
  c.schedule.t_max = 100;
  c.epochs = 100;
  c.batch_size = 32;
  c.eval_every = 10;
  c.seeds = {1, 2, 3};
  return c;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : fields()) out.push_back(name);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  field(key).set(config, key, value);
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return field(key).get(config); }

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    set_config_value(base, full, line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& [name, f] : fields()) {
    const auto dot = name.find('.');
    const std::string s = name.substr(0, dot);
    if (s != section) {
      out += (section.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += name.substr(dot + 1) + " = " + f.get(config) + "\n";
  }
  return out;
}

std::vector<std::string> config_problems(const RunConfig& c) {
  std::vector<std::string> problems;
  auto check = [&](bool ok, std::string what) {
    if (!ok) problems.push_back(std::move(what));
  };
  if (c.model_kind == ModelKind::mlp) check(c.hidden >= 1, "model.hidden must be >= 1 for mlp");
  if (c.data.source == DataSource::blobs) {
    check(c.data.classes >= 2, "data.classes must be >= 2");
    check(c.data.per_class >= 1, "data.per_class must be >= 1");
    check(c.data.dim >= 1, "data.dim must be >= 1");
    check(c.data.spread > 0.0, "data.spread must be > 0");
  } else {
    check(!c.data.csv_path.empty(), "data.csv_path is required when data.source = csv");
  }
  check(c.data.alpha > 0.0, "data.alpha must be > 0");
  check(c.topology.agents >= 1, "topology.agents must be >= 1");
  if (c.topology.kind == TopologyKind::file) check(!c.topology.path.empty(), "topology.path is required when topology.kind = file");
  try {
    c.optimizer.check();
  } catch (const std::invalid_argument& e) {
    problems.emplace_back(e.what());
  }
  try {
    c.schedule.check();
  } catch (const std::invalid_argument& e) {
    problems.emplace_back(e.what());
  }
  check(c.epochs >= 1, "run.epochs must be >= 1");
  check(c.batch_size >= 1, "run.batch_size must be >= 1");
  check(c.eval_every >= 1, "run.eval_every must be >= 1");
  check(!c.seeds.empty(), "run.seeds must name at least one seed");
  {
    auto sorted = c.seeds;
    std::sort(sorted.begin(), sorted.end());
    check(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "run.seeds contains duplicates");
  }
  check(c.threads >= 1, "run.threads must be >= 1");
  check(c.jobs >= 1, "run.jobs must be >= 1");
  check(!c.output.empty(), "run.output must not be empty");
  return problems;
}

void check_config(const RunConfig& config) {
  const auto problems = config_problems(config);
  if (problems.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw ConfigError(msg);
}

ModelSpec model_spec(const RunConfig& config, std::size_t input_dim, int num_classes) {
  ModelSpec spec;
  spec.kind = config.model_kind;
  spec.input_dim = input_dim;
  spec.hidden = config.model_kind == ModelKind::mlp ? config.hidden : 0;
  spec.num_classes = num_classes;
  return spec;
}

}  // namespace dsgd
