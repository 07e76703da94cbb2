#include <cstdio>
#include <sstream>

#include "mcl/error.hpp"
#include "mcl/lost_sales.hpp"
#include "mcl/text_config.hpp"

namespace mcl {
namespace {

std::optional<int> parse_cap(const TextConfig& cfg, const std::string& section,
                             const std::string& key) {
  const auto* e = cfg.find(section, key);
  if (e == nullptr || e->value == "auto") {
    return std::nullopt;
  }
  const auto v = cfg.get_int(section, key);
  if (v < 1 || v > 100000) {
    cfg.fail(*e, "must be 'auto' or an integer in 1..100000");
  }
  return static_cast<int>(v);
}

}  // namespace

LostSalesConfig instance_from_config(const TextConfig& cfg, const std::string& section) {
  cfg.reject_unknown(section, {"lead_time", "holding_cost", "penalty", "demand", "demand_mean",
                               "order_cap", "position_cap", "discount"});
  const auto require = [&](bool ok, const char* key, const std::string& message) {
    if (!ok) {
      cfg.fail(*cfg.find(section, key), message);
    }
  };
  LostSalesConfig out;
  out.lead_time = static_cast<int>(cfg.get_int(section, "lead_time"));
  require(out.lead_time >= 1 && out.lead_time <= 4, "lead_time", "must be in 1..4");
  out.penalty = cfg.get_double(section, "penalty");
  require(out.penalty >= 0.0, "penalty", "must be nonnegative");
  if (cfg.has(section, "holding_cost")) {
    out.holding_cost = cfg.get_double(section, "holding_cost");
    require(out.holding_cost > 0.0, "holding_cost", "must be positive");
  }
  if (const auto* e = cfg.find(section, "demand")) {
    try {
      out.demand.family = demand_family_from_string(e->value);
    } catch (const ValidationError& err) {
      cfg.fail(*e, err.what());
    }
  }
  if (cfg.has(section, "demand_mean")) {
    out.demand.mean = cfg.get_double(section, "demand_mean");
    require(out.demand.mean > 0.0, "demand_mean", "must be positive");
  }
  out.order_cap = parse_cap(cfg, section, "order_cap");
  out.position_cap = parse_cap(cfg, section, "position_cap");
  if (out.order_cap && out.position_cap) {
    require(*out.position_cap >= *out.order_cap, "position_cap", "must be at least order_cap");
  }
  if (cfg.has(section, "discount")) {
    out.discount = cfg.get_double(section, "discount");
    require(out.discount > 0.0 && out.discount < 1.0, "discount", "must lie in (0, 1)");
  }
  return out;
}

LostSalesConfig parse_instance(const std::string& text, const std::string& source) {
  return instance_from_config(TextConfig::parse(text, source), "");
}

LostSalesConfig load_instance(const std::string& path) {
  return instance_from_config(TextConfig::load(path), "");
}

std::string write_instance(const LostSalesConfig& cfg) {
  std::ostringstream out;
  out << "# mcl lost-sales instance v1\n";
  out << "lead_time = " << cfg.lead_time << "\n";
  out << "holding_cost = " << format_double(cfg.holding_cost) << "\n";
  out << "penalty = " << format_double(cfg.penalty) << "\n";
  out << "demand = " << to_string(cfg.demand.family) << "\n";
  out << "demand_mean = " << format_double(cfg.demand.mean) << "\n";
  out << "order_cap = " << (cfg.order_cap ? std::to_string(*cfg.order_cap) : "auto") << "\n";
  out << "position_cap = " << (cfg.position_cap ? std::to_string(*cfg.position_cap) : "auto")
      << "\n";
  out << "discount = " << format_double(cfg.discount) << "\n";
  return out.str();
}

std::string instance_hash(const LostSalesConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : write_instance(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string instance_id(const LostSalesConfig& cfg) {
  return "ls_t" + std::to_string(cfg.lead_time) + "_p" + format_double(cfg.penalty) + "_" +
         to_string(cfg.demand.family) + format_double(cfg.demand.mean);
}

}  // namespace mcl
