// Copyright 2026 The topdp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "topdp/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <ostream>
#include <stdexcept>

namespace topdp {

namespace {

[[noreturn]] void fail_key(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config key '" + key + "': " + why);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::invalid_argument&) {
    fail_key(key, "expected a number, got '" + value + "'");
  } catch (const std::out_of_range&) {
    fail_key(key, "number out of range: '" + value + "'");
  }
  if (used != value.size()) fail_key(key, "expected a number, got '" + value + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  long long v = 0;
  std::size_t used = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::invalid_argument&) {
    fail_key(key, "expected an integer, got '" + value + "'");
  } catch (const std::out_of_range&) {
    fail_key(key, "integer out of range: '" + value + "'");
  }
  if (used != value.size()) fail_key(key, "expected an integer, got '" + value + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  unsigned long long v = 0;
  std::size_t used = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::invalid_argument&) {
    fail_key(key, "expected an unsigned integer, got '" + value + "'");
  } catch (const std::out_of_range&) {
    fail_key(key, "integer out of range: '" + value + "'");
  }
  if (used != value.size() || value.find('-') != std::string::npos) {
    fail_key(key, "expected an unsigned integer, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail_key(key, "expected true|false, got '" + value + "'");
}

// Shortest round-trip text for a double (so echo files reparse exactly).
std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

struct KeyHandler {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeyHandler>& key_table() {
  static const std::vector<KeyHandler> table = [] {
    std::vector<KeyHandler> t;
    auto add = [&t](std::string name,
                    std::function<void(ExperimentConfig&, const std::string&)> set,
                    std::function<std::string(const ExperimentConfig&)> get) {
      t.push_back({std::move(name), std::move(set), std::move(get)});
    };

    add("mode",
        [](ExperimentConfig& c, const std::string& v) {
          if (v != "sync" && v != "async") fail_key("mode", "expected sync|async, got '" + v + "'");
          c.mode = v;
        },
        [](const ExperimentConfig& c) { return c.mode; });
    add("algorithm",
        [](ExperimentConfig& c, const std::string& v) {
          if (v != "topdp" && v != "topdp_no_decay" && v != "full_noise" && v != "no_noise") {
            fail_key("algorithm",
                     "expected topdp|topdp_no_decay|full_noise|no_noise, got '" + v + "'");
          }
          c.algorithm = v;
        },
        [](const ExperimentConfig& c) { return c.algorithm; });
    add("iterations",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("iterations", v);
          if (x < 1) fail_key("iterations", "must be >= 1");
          c.iterations = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.iterations); });
    add("dropout",
        [](ExperimentConfig& c, const std::string& v) {
          const double x = parse_double("dropout", v);
          if (!(x >= 0.0 && x <= 1.0)) fail_key("dropout", "must be in [0, 1]");
          c.dropout = x;
        },
        [](const ExperimentConfig& c) { return format_double(c.dropout); });

    add("topology",
        [](ExperimentConfig& c, const std::string& v) {
          if (v != "random" && v != "ring" && v != "star" && v != "tree" && v != "mesh") {
            fail_key("topology", "expected random|ring|star|tree|mesh, got '" + v + "'");
          }
          c.topology = v;
        },
        [](const ExperimentConfig& c) { return c.topology; });
    add("n_agents",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("n_agents", v);
          if (x < 2) fail_key("n_agents", "must be >= 2");
          c.n_agents = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.n_agents); });
    add("connection_rate",
        [](ExperimentConfig& c, const std::string& v) {
          const double x = parse_double("connection_rate", v);
          if (!(x > 0.0 && x <= 1.0)) fail_key("connection_rate", "must be in (0, 1]");
          c.connection_rate = x;
        },
        [](const ExperimentConfig& c) { return format_double(c.connection_rate); });
    add("star_hubs",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("star_hubs", v);
          if (x < 1) fail_key("star_hubs", "must be >= 1");
          c.star_hubs = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.star_hubs); });
    add("tree_branching",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("tree_branching", v);
          if (x < 1) fail_key("tree_branching", "must be >= 1");
          c.tree_branching = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.tree_branching); });
    add("mesh_extra",
        [](ExperimentConfig& c, const std::string& v) {
          const double x = parse_double("mesh_extra", v);
          if (!(x >= 0.0 && x <= 1.0)) fail_key("mesh_extra", "must be in [0, 1]");
          c.mesh_extra = x;
        },
        [](const ExperimentConfig& c) { return format_double(c.mesh_extra); });
    add("graph_retries",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("graph_retries", v);
          if (x < 1) fail_key("graph_retries", "must be >= 1");
          c.graph_retries = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.graph_retries); });

    add("epsilon",
        [](ExperimentConfig& c, const std::string& v) {
          const double x = parse_double("epsilon", v);
          if (!(x > 0.0)) fail_key("epsilon", "must be positive");
          c.epsilon = x;
        },
        [](const ExperimentConfig& c) { return format_double(c.epsilon); });
    add("delta",
        [](ExperimentConfig& c, const std::string& v) {
          const double x = parse_double("delta", v);
          if (!(x > 0.0 && x < 1.0)) fail_key("delta", "must be in (0, 1)");
          c.delta = x;
        },
        [](const ExperimentConfig& c) { return format_double(c.delta); });
    add("gamma",
        [](ExperimentConfig& c, const std::string& v) {
          const double x = parse_double("gamma", v);
          if (!(x > 0.0 && x <= 1.0)) fail_key("gamma", "must be in (0, 1]");
          c.gamma = x;
        },
        [](const ExperimentConfig& c) { return format_double(c.gamma); });
    add("period",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("period", v);
          if (x < 1) fail_key("period", "must be >= 1");
          c.period = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.period); });

    add("alpha",
        [](ExperimentConfig& c, const std::string& v) {
          const double x = parse_double("alpha", v);
          if (!(x > 0.0 && x <= 1.0)) fail_key("alpha", "must be in (0, 1]");
          c.alpha = x;
        },
        [](const ExperimentConfig& c) { return format_double(c.alpha); });
    add("lambda0",
        [](ExperimentConfig& c, const std::string& v) {
          const double x = parse_double("lambda0", v);
          if (!(x > 0.0)) fail_key("lambda0", "must be positive");
          c.lambda0 = x;
        },
        [](const ExperimentConfig& c) { return format_double(c.lambda0); });
    add("clip",
        [](ExperimentConfig& c, const std::string& v) {
          const double x = parse_double("clip", v);
          if (!(x > 0.0)) fail_key("clip", "must be positive");
          c.clip = x;
        },
        [](const ExperimentConfig& c) { return format_double(c.clip); });
    add("batch_size",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("batch_size", v);
          if (x < 1) fail_key("batch_size", "must be >= 1");
          c.batch_size = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.batch_size); });
    add("lambda_fade",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("lambda_fade", v);
          if (x < 0) fail_key("lambda_fade", "must be >= 0");
          c.lambda_fade = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.lambda_fade); });
    add("model",
        [](ExperimentConfig& c, const std::string& v) {
          if (v != "logistic" && v != "mlp") fail_key("model", "expected logistic|mlp, got '" + v + "'");
          c.model = v;
        },
        [](const ExperimentConfig& c) { return c.model; });
    add("hidden_dim",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("hidden_dim", v);
          if (x < 1) fail_key("hidden_dim", "must be >= 1");
          c.hidden_dim = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.hidden_dim); });

    add("dataset",
        [](ExperimentConfig& c, const std::string& v) {
          if (v != "synth" && v != "idx") fail_key("dataset", "expected synth|idx, got '" + v + "'");
          c.dataset = v;
        },
        [](const ExperimentConfig& c) { return c.dataset; });
    add("idx_images",
        [](ExperimentConfig& c, const std::string& v) { c.idx_images = v; },
        [](const ExperimentConfig& c) { return c.idx_images; });
    add("idx_labels",
        [](ExperimentConfig& c, const std::string& v) { c.idx_labels = v; },
        [](const ExperimentConfig& c) { return c.idx_labels; });
    add("idx_test_images",
        [](ExperimentConfig& c, const std::string& v) { c.idx_test_images = v; },
        [](const ExperimentConfig& c) { return c.idx_test_images; });
    add("idx_test_labels",
        [](ExperimentConfig& c, const std::string& v) { c.idx_test_labels = v; },
        [](const ExperimentConfig& c) { return c.idx_test_labels; });
    add("synth_per_class",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("synth_per_class", v);
          if (x < 1) fail_key("synth_per_class", "must be >= 1");
          c.synth_per_class = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.synth_per_class); });
    add("synth_classes",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("synth_classes", v);
          if (x < 2) fail_key("synth_classes", "must be >= 2");
          c.synth_classes = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.synth_classes); });
    add("synth_dim",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("synth_dim", v);
          if (x < 1) fail_key("synth_dim", "must be >= 1");
          c.synth_dim = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.synth_dim); });
    add("synth_spread",
        [](ExperimentConfig& c, const std::string& v) {
          const double x = parse_double("synth_spread", v);
          if (!(x >= 0.0)) fail_key("synth_spread", "must be non-negative");
          c.synth_spread = x;
        },
        [](const ExperimentConfig& c) { return format_double(c.synth_spread); });
    add("synth_test_per_class",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("synth_test_per_class", v);
          if (x < 1) fail_key("synth_test_per_class", "must be >= 1");
          c.synth_test_per_class = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.synth_test_per_class); });
    add("dump_dataset",
        [](ExperimentConfig& c, const std::string& v) { c.dump_dataset = parse_bool("dump_dataset", v); },
        [](const ExperimentConfig& c) { return c.dump_dataset ? "true" : "false"; });

    add("master_seed",
        [](ExperimentConfig& c, const std::string& v) { c.master_seed = parse_u64("master_seed", v); },
        [](const ExperimentConfig& c) { return std::to_string(c.master_seed); });
    add("eval_every",
        [](ExperimentConfig& c, const std::string& v) {
          const long long x = parse_int("eval_every", v);
          if (x < 0) fail_key("eval_every", "must be >= 0 (0 selects epoch cadence)");
          c.eval_every = static_cast<int>(x);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.eval_every); });
    add("out_dir",
        [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; },
        [](const ExperimentConfig& c) { return c.out_dir; });
    add("log_messages",
        [](ExperimentConfig& c, const std::string& v) { c.log_messages = parse_bool("log_messages", v); },
        [](const ExperimentConfig& c) { return c.log_messages ? "true" : "false"; });

    return t;
  }();
  return table;
}

void cross_validate(const ExperimentConfig& cfg) {
  if (cfg.dataset == "idx") {
    if (cfg.idx_images.empty() || cfg.idx_labels.empty() || cfg.idx_test_images.empty() ||
        cfg.idx_test_labels.empty()) {
      throw std::invalid_argument(
          "config: dataset=idx requires idx_images, idx_labels, idx_test_images and "
          "idx_test_labels");
    }
  }
}

}  // namespace

void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value) {
  for (const KeyHandler& h : key_table()) {
    if (h.name == key) {
      h.set(cfg, value);
      return;
    }
  }
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> names;
  for (const KeyHandler& h : key_table()) names.push_back(h.name);
  return names;
}

ExperimentConfig parse_config(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) {
        line.erase(hash);
      }
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("config: " + path + ":" + std::to_string(line_no) +
                                    ": expected key=value, got '" + line + "'");
      }
      apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
  for (const auto& [key, value] : overrides) {
    apply_config_key(cfg, key, value);
  }
  cross_validate(cfg);
  return cfg;
}

void write_config_echo(const ExperimentConfig& cfg, std::ostream& out) {
  for (const KeyHandler& h : key_table()) {
    out << h.name << "=" << h.get(cfg) << "\n";
  }
}

}  // namespace topdp
