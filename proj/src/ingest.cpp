#include "driftwatch/ingest.hpp"

#include <cmath>

#include "json.hpp"

namespace driftwatch {

namespace {

using nlohmann::json;

json parse_json(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw FieldError("record", "not valid JSON");
  if (!j.is_object()) throw FieldError("record", "must be a JSON object");
  return j;
}

Tick require_tick(const json& j) {
  if (!j.contains("ts") || !j["ts"].is_number_integer()) {
    throw FieldError("ts", "required integer tick");
  }
  return j["ts"].get<Tick>();
}

std::string require_series(const json& j) {
  if (!j.contains("series") || !j["series"].is_string()) {
    throw FieldError("series", "required string");
  }
  return j["series"].get<std::string>();
}

double require_finite(const json& v, const char* field) {
  if (!v.is_number()) throw FieldError(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw FieldError(field, "must be finite");
  return x;
}

PredictiveDistribution parse_pred(const json& p) {
  if (!p.is_object()) throw FieldError("pred", "must be an object");
  if (p.contains("gaussian")) {
    const auto& g = p["gaussian"];
    if (!g.is_array() || g.size() != 2) {
      throw FieldError("pred.gaussian", "expected [mu, sigma]");
    }
    Gaussian out{require_finite(g[0], "pred.gaussian.mu"), g[1].is_number() ? g[1].get<double>() : 0.0};
    if (!g[1].is_number()) throw FieldError("pred.gaussian.sigma", "must be a number");
    PredictiveDistribution dist{out};
    dist.validate();
    return dist;
  }
  if (p.contains("ensemble")) {
    const auto& e = p["ensemble"];
    if (!e.is_array()) throw FieldError("pred.ensemble", "expected an array of reals");
    Ensemble out;
    out.members.reserve(e.size());
    for (const auto& v : e) out.members.push_back(require_finite(v, "pred.ensemble"));
    PredictiveDistribution dist{std::move(out)};
    dist.validate();
    return dist;
  }
  if (p.contains("histogram")) {
    const auto& h = p["histogram"];
    if (!h.is_object() || !h.contains("edges") || !h.contains("masses")) {
      throw FieldError("pred.histogram", "expected {edges, masses}");
    }
    Histogram out;
    for (const auto& v : h["edges"]) out.edges.push_back(require_finite(v, "pred.histogram.edges"));
    for (const auto& v : h["masses"]) out.masses.push_back(require_finite(v, "pred.histogram.masses"));
    PredictiveDistribution dist{std::move(out)};
    dist.validate();
    return dist;
  }
  throw FieldError("pred", "expected one of gaussian | ensemble | histogram");
}

json pred_to_json(const PredictiveDistribution& d) {
  json p;
  if (d.is_gaussian()) {
    p["gaussian"] = {d.gaussian().mu, d.gaussian().sigma};
  } else if (d.is_ensemble()) {
    p["ensemble"] = d.ensemble().members;
  } else {
    p["histogram"] = {{"edges", d.histogram().edges}, {"masses", d.histogram().masses}};
  }
  return p;
}

}  // namespace

StreamRecord parse_record(std::string_view line) {
  const json j = parse_json(line);
  const Tick ts = require_tick(j);
  std::string series = require_series(j);

  if (!j.contains("pred")) {
    if (!j.contains("outcome")) {
      throw FieldError("record", "needs a pred, an outcome, or both");
    }
    OutcomeRecord rec;
    rec.timestamp = ts;
    rec.series_id = std::move(series);
    rec.outcome = require_finite(j["outcome"], "outcome");
    return rec;
  }

  PredictionEvent event;
  event.timestamp = ts;
  event.series_id = std::move(series);
  event.prediction = parse_pred(j["pred"]);
  if (j.contains("outcome") && !j["outcome"].is_null()) {
    event.outcome = require_finite(j["outcome"], "outcome");
  }
  if (j.contains("groups")) {
    const auto& g = j["groups"];
    if (!g.is_object()) throw FieldError("groups", "must be an object of strings");
    for (auto it = g.begin(); it != g.end(); ++it) {
      if (!it.value().is_string()) throw FieldError("groups", "values must be strings");
      event.groups[it.key()] = it.value().get<std::string>();
    }
  }
  if (j.contains("lead_time") && !j["lead_time"].is_null()) {
    if (!j["lead_time"].is_number_integer() || j["lead_time"].get<std::int64_t>() < 0) {
      throw FieldError("lead_time", "must be a non-negative integer");
    }
    event.lead_time = j["lead_time"].get<std::int64_t>();
  }
  return event;
}

PredictionEvent ingest_event(std::string_view line) {
  StreamRecord rec = parse_record(line);
  if (!std::holds_alternative<PredictionEvent>(rec)) {
    throw FieldError("pred", "record has no prediction");
  }
  return std::get<PredictionEvent>(std::move(rec));
}

std::string to_jsonl(const PredictionEvent& event) {
  json j;
  j["ts"] = event.timestamp;
  j["series"] = event.series_id;
  j["pred"] = pred_to_json(event.prediction);
  if (event.outcome) j["outcome"] = *event.outcome;
  if (!event.groups.empty()) {
    json g = json::object();
    for (const auto& [k, v] : event.groups) g[k] = v;
    j["groups"] = g;
  }
  if (event.lead_time) j["lead_time"] = *event.lead_time;
  return j.dump();
}

std::string to_jsonl(const OutcomeRecord& record) {
  json j;
  j["ts"] = record.timestamp;
  j["series"] = record.series_id;
  j["outcome"] = record.outcome;
  return j.dump();
}

std::string to_jsonl(const StreamRecord& record) {
  if (std::holds_alternative<PredictionEvent>(record)) {
    return to_jsonl(std::get<PredictionEvent>(record));
  }
  return to_jsonl(std::get<OutcomeRecord>(record));
}

}  // namespace driftwatch
