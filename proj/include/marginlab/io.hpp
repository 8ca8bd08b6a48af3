#pragma once

// JSON schemas for objects, verdicts and certificates.
//
//   metric space   {"ids": [...], "dist": [[...]]}
//   vector set     {"points": [[...]], "p": 2}            p may be "inf"
//   class          {"kind": "...", "params": {...}, "space": <metric space> | "points": ...}
//   bundle         {"construction": ..., "object_type": "vectors" | "metric" | "phi", "object": ..., ...}
//
// Numbers may be JSON numbers or strings; strings such as "1/3" are read as
// exact rationals.

#include "marginlab/analysis.hpp"
#include "marginlab/constructions.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace marginlab {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scalars

inline Json rational_json(const Rational& r) { return rational_to_string(r); }

inline Rational read_rational(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) return to_rational(j.get<double>());
  throw InputError("expected a number, got " + std::string(j.type_name()));
}

inline double read_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    return to_double(parse_rational(s));
  }
  throw InputError("expected a number, got " + std::string(j.type_name()));
}

inline bool is_exact_string(const Json& j) { return j.is_string(); }

inline Json norm_json(const NormSpec& n) {
  if (n.is_infinite()) return "inf";
  return n.p();
}

inline NormSpec read_norm(const Json& j) { return NormSpec(read_double(j)); }

inline Json vector_json(std::span<const double> v) { return Json(std::vector<double>(v.begin(), v.end())); }

inline Json rational_vector_json(const std::vector<Rational>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(rational_json(x));
  return a;
}

inline Json labels_json(const std::vector<int>& y) { return Json(y); }

// ---------------------------------------------------------------------------
// Files

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("malformed JSON in '" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("write failed for '" + path + "'");
}

inline void write_json_file(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Metric spaces and vector sets

/// Reads {"ids", "dist"} without validating the axioms. Exact when every
/// entry is a string or an integer.
inline MetricObject read_metric_object(const Json& j) {
  if (!j.is_object() || !j.contains("dist")) throw InputError("metric space: missing \"dist\"");
  const Json& d = j.at("dist");
  if (!d.is_array() || d.empty()) throw InputError("metric space: \"dist\" must be a nonempty matrix");
  MetricObject m;
  for (const auto& row : d) {
    if (!row.is_array()) throw InputError("metric space: \"dist\" rows must be arrays");
    std::vector<Rational> r;
    for (const auto& x : row) r.push_back(read_rational(x));
    m.dist.push_back(std::move(r));
  }
  if (j.contains("ids")) {
    for (const auto& id : j.at("ids")) {
      if (!id.is_string()) throw InputError("metric space: ids must be strings");
      m.ids.push_back(id.get<std::string>());
    }
  } else {
    m.ids = MetricSpace::default_ids(m.dist.size());
  }
  if (m.ids.size() != m.dist.size()) throw InputError("metric space: id count does not match matrix size");
  for (const auto& row : m.dist)
    if (row.size() != m.dist.size()) throw InputError("distance matrix is not square");
  return m;
}

/// Rational entries are written as strings when `exact`.
inline Json metric_json(const std::vector<std::string>& ids, const DistanceMatrix<Rational>& d, bool exact) {
  Json j;
  j["ids"] = ids;
  Json rows = Json::array();
  for (const auto& row : d) {
    Json r = Json::array();
    for (const auto& x : row) {
      if (exact) r.push_back(rational_json(x));
      else r.push_back(to_double(x));
    }
    rows.push_back(std::move(r));
  }
  j["dist"] = std::move(rows);
  return j;
}

inline Json metric_json(const MetricSpace& m) {
  Json j;
  j["ids"] = m.ids();
  j["dist"] = m.matrix();
  return j;
}

inline Json metric_json(const MetricObject& m, bool exact = true) { return metric_json(m.ids, m.dist, exact); }

inline VectorSetObject read_vector_set(const Json& j, std::optional<NormSpec> norm_override = std::nullopt) {
  if (!j.is_object() || !j.contains("points")) throw InputError("vector set: missing \"points\"");
  const Json& pts = j.at("points");
  if (!pts.is_array() || pts.empty()) throw InputError("vector set: \"points\" must be a nonempty array");
  VectorSetObject v;
  bool exact = true;
  std::vector<std::vector<Rational>> ex;
  for (const auto& row : pts) {
    if (!row.is_array() || row.empty()) throw InputError("vector set: each point must be a nonempty array");
    Vector x;
    std::vector<Rational> xr;
    for (const auto& c : row) {
      if (!(c.is_string() || c.is_number_integer())) exact = false;
      xr.push_back(read_rational(c));
      x.push_back(read_double(c));
    }
    v.points.push_back(std::move(x));
    ex.push_back(std::move(xr));
  }
  const std::size_t d = v.points.front().size();
  for (const auto& x : v.points)
    if (x.size() != d) throw InputError("vector set: points differ in dimension");
  if (norm_override) v.norm = *norm_override;
  else if (j.contains("p")) v.norm = read_norm(j.at("p"));
  if (exact) v.exact = std::move(ex);
  return v;
}

inline Json vector_set_json(const VectorSetObject& v) {
  Json j;
  j["p"] = norm_json(v.norm);
  if (v.exact) {
    Json rows = Json::array();
    for (const auto& x : *v.exact) rows.push_back(rational_vector_json(x));
    j["points"] = std::move(rows);
  } else {
    j["points"] = v.points;
  }
  return j;
}

inline Json violation_json(const std::optional<MetricViolation>& v, const std::vector<std::string>& ids) {
  Json j;
  if (!v) {
    j["status"] = "MetricValid";
    return j;
  }
  j["status"] = "MetricInvalid";
  j["axiom"] = to_string(v->kind);
  Json idx = Json::array({v->i, v->j});
  Json names = Json::array({ids.at(v->i), ids.at(v->j)});
  if (v->kind == MetricAxiom::Triangle) {
    idx.push_back(v->k);
    names.push_back(ids.at(v->k));
  }
  j["indices"] = idx;
  j["ids"] = names;
  return j;
}

// ---------------------------------------------------------------------------
// Phi specs and class descriptors

inline Json phi_json(const PhiSpec& s) {
  Json j;
  j["preset"] = s.preset == PhiSpec::Preset::Exponential ? "exp" : "inverse-power";
  if (s.preset == PhiSpec::Preset::InversePower) j["k"] = s.k;
  j["N"] = s.N;
  return j;
}

inline PhiSpec read_phi(const Json& j) {
  const std::string preset = j.value("preset", std::string("exp"));
  const auto n = j.value("N", std::uint64_t{100});
  if (preset == "exp") return PhiSpec::exponential(n);
  if (preset == "inverse-power") return PhiSpec::inverse_power(j.value("k", 1), n);
  throw InputError("phi: unknown preset '" + preset + "'");
}

inline std::optional<DistanceVariant> parse_variant(const std::string& kind) {
  if (kind == "DistanceCombination") return DistanceVariant::Full;
  if (kind == "DistanceCombinationPos") return DistanceVariant::Pos;
  if (kind == "DistanceCombinationNeg") return DistanceVariant::Neg;
  return std::nullopt;
}

/// Builds an oracle over a metric object. `kind` is a class kind name.
inline ConceptClassOracle metric_oracle(const std::string& kind, const MetricObject& m, const Json& params = {}) {
  const RationalMetricSpace exact = m.exact_space();
  const MetricSpace space = exact.to_double();
  if (auto v = parse_variant(kind)) {
    std::vector<std::size_t> centers = iota_points(m.size());
    if (params.is_object() && params.contains("centers")) {
      centers.clear();
      for (const auto& x : params.at("centers")) centers.push_back(x.is_string() ? m.index_of(x) : x.get<std::size_t>());
    }
    return DistanceCombinationClass(exact, std::move(centers), *v);
  }
  if (kind == "Lipschitz") return LipschitzClass(exact);
  if (kind == "BallPair") {
    if (!params.is_object() || !params.contains("r") || !params.contains("R"))
      throw InputError("BallPair class needs params r and R");
    return BallPairClass(space, BallPairParams{read_double(params.at("r")), read_double(params.at("R"))});
  }
  throw InputError("class kind '" + kind + "' does not take a metric space");
}

inline Json class_json(const ConceptClassOracle& o) {
  Json j;
  j["kind"] = kind_name(o);
  Json params = Json::object();
  if (auto* c = std::get_if<DualBallClass>(&o)) {
    params["p"] = norm_json(c->norm);
    VectorSetObject v{c->points, c->norm, c->exact.empty() ? std::nullopt : std::optional(c->exact)};
    j["points"] = vector_set_json(v)["points"];
  } else if (auto* c = std::get_if<DistanceCombinationClass>(&o)) {
    params["centers"] = c->centers;
    j["space"] = metric_json(c->space.ids(), c->rational_space().matrix(), c->exact.has_value());
  } else if (auto* c = std::get_if<LipschitzClass>(&o)) {
    const auto ex = c->exact ? *c->exact : c->space.to_rational();
    j["space"] = metric_json(ex.ids(), ex.matrix(), c->exact.has_value());
  } else if (auto* c = std::get_if<BallPairClass>(&o)) {
    params["r"] = c->params.r;
    params["R"] = c->params.R;
    j["space"] = metric_json(c->space);
  } else if (auto* c = std::get_if<PhiClass>(&o)) {
    params = phi_json(c->spec);
  } else {
    const auto& poly = std::get<PolytopeClass>(o);
    Json rows = Json::array();
    for (const auto& v : poly.vertices) rows.push_back(rational_vector_json(v));
    params["vertices"] = std::move(rows);
  }
  j["params"] = std::move(params);
  return j;
}

inline ConceptClassOracle read_class(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const Json params = j.value("params", Json::object());
  if (kind == "DualBall") {
    Json vs;
    vs["points"] = j.at("points");
    if (params.contains("p")) vs["p"] = params.at("p");
    return read_vector_set(vs).oracle();
  }
  if (kind == "Phi") return PhiClass(read_phi(params));
  if (kind == "Polytope") {
    std::vector<std::vector<Rational>> v;
    for (const auto& row : params.at("vertices")) {
      std::vector<Rational> r;
      for (const auto& x : row) r.push_back(read_rational(x));
      v.push_back(std::move(r));
    }
    return PolytopeClass(std::move(v));
  }
  return metric_oracle(kind, read_metric_object(j.at("space")), params);
}

// ---------------------------------------------------------------------------
// Verdicts

inline Json witness_json(const Witness& w) {
  Json j;
  j["kind"] = to_string(w.kind);
  if (w.kind == Witness::Kind::Center) {
    j["center"] = w.center;
  } else {
    j["data"] = w.data;
    if (!w.exact.empty()) j["exact"] = rational_vector_json(w.exact);
  }
  return j;
}

inline Witness read_witness(const Json& j) {
  Witness w;
  const std::string k = j.at("kind").get<std::string>();
  if (k == "functional") w.kind = Witness::Kind::Functional;
  else if (k == "coefficients") w.kind = Witness::Kind::Coefficients;
  else if (k == "center") w.kind = Witness::Kind::Center;
  else if (k == "values") w.kind = Witness::Kind::Values;
  else throw InputError("unknown witness kind '" + k + "'");
  if (w.kind == Witness::Kind::Center) {
    w.center = j.at("center").get<std::size_t>();
  } else {
    w.data = j.at("data").get<Vector>();
    if (j.contains("exact"))
      for (const auto& x : j.at("exact")) w.exact.push_back(read_rational(x));
  }
  return w;
}

inline Json collapse_json(const Collapse& c) {
  Json j;
  j["mu"] = c.mu.values();
  j["value"] = c.value;
  if (!c.exact_mu.empty()) j["exact_mu"] = rational_vector_json(c.exact_mu);
  if (c.exact_value_squared) j["exact_value_squared"] = rational_json(*c.exact_value_squared);
  if (c.exact_value) j["exact_value"] = rational_json(*c.exact_value);
  return j;
}

inline Json realize_json(const RealizeVerdict& v) {
  Json j;
  j["status"] = to_string(v.status);
  j["value"] = v.value;
  j["lower"] = v.lower;
  j["band"] = v.band;
  j["exact"] = v.exact;
  if (v.witness) j["witness"] = witness_json(*v.witness);
  if (v.collapse) j["collapse"] = collapse_json(*v.collapse);
  return j;
}

inline Json counterexample_json(const Counterexample& c) {
  Json j;
  j["pattern"] = c.pattern;
  j["labels"] = c.labels;
  j["value"] = c.value;
  if (c.lambda.size() == 0) return j;
  j["lambda"] = c.lambda.values();
  if (!c.exact_lambda.empty()) j["exact_lambda"] = rational_vector_json(c.exact_lambda);
  j["collapse"] = collapse_json(c.collapse);
  return j;
}

/// Witness maps are written in full up to `max_witnesses` patterns.
inline Json shatter_json(const ShatterVerdict& v, std::size_t max_witnesses = std::size_t{1} << 15) {
  Json j;
  j["status"] = to_string(v.status);
  j["points"] = v.points;
  j["symmetric"] = v.symmetric;
  j["symmetry_reduced"] = v.symmetry_reduced;
  j["exact"] = v.exact;
  j["band"] = v.band;
  j["patterns_checked"] = v.patterns_checked;
  if (v.counterexample) j["counterexample"] = counterexample_json(*v.counterexample);
  if (v.marginal_pattern) j["marginal_pattern"] = *v.marginal_pattern;
  if (v.status == ShatterStatus::Shattered) {
    if (v.symmetry_reduced) {
      j["base_witness"] = witness_json(v.stored_.front());
      j["coordinate_owner"] = v.owner_;
    } else if (v.stored_witnesses() > 0 && v.stored_witnesses() <= max_witnesses) {
      Json w = Json::array();
      for (std::size_t k = 0; k < v.stored_witnesses(); ++k) w.push_back(witness_json(v.stored_[k]));
      j["witnesses"] = std::move(w);
      j["swap_negation"] = v.swap_negation_;
    }
  }
  return j;
}

inline ShatterStatus parse_shatter_status(const std::string& s) {
  if (s == "Shattered") return ShatterStatus::Shattered;
  if (s == "NotShattered") return ShatterStatus::NotShattered;
  if (s == "Marginal") return ShatterStatus::Marginal;
  throw InputError("unknown shatter status '" + s + "'");
}

inline ShatterVerdict read_shatter(const Json& j) {
  ShatterVerdict v;
  v.status = parse_shatter_status(j.at("status").get<std::string>());
  v.points = j.at("points").get<std::vector<std::size_t>>();
  v.symmetric = j.value("symmetric", false);
  v.symmetry_reduced = j.value("symmetry_reduced", false);
  v.exact = j.value("exact", false);
  v.band = j.value("band", 0.0);
  v.patterns_checked = j.value("patterns_checked", std::uint64_t{0});
  if (j.contains("marginal_pattern")) v.marginal_pattern = j.at("marginal_pattern").get<std::uint64_t>();
  if (j.contains("counterexample")) {
    const Json& c = j.at("counterexample");
    Counterexample ce;
    ce.pattern = c.at("pattern").get<std::uint64_t>();
    ce.labels = c.at("labels").get<std::vector<int>>();
    ce.value = c.at("value").get<double>();
    if (!c.contains("lambda")) {
      v.counterexample = std::move(ce);
      return v;
    }
    ce.lambda = SignedWeights(c.at("lambda").get<Vector>());
    if (c.contains("exact_lambda"))
      for (const auto& x : c.at("exact_lambda")) ce.exact_lambda.push_back(read_rational(x));
    const Json& col = c.at("collapse");
    ce.collapse.mu = SimplexWeights(col.at("mu").get<Vector>());
    ce.collapse.value = col.at("value").get<double>();
    if (col.contains("exact_mu"))
      for (const auto& x : col.at("exact_mu")) ce.collapse.exact_mu.push_back(read_rational(x));
    if (col.contains("exact_value_squared")) ce.collapse.exact_value_squared = read_rational(col.at("exact_value_squared"));
    if (col.contains("exact_value")) ce.collapse.exact_value = read_rational(col.at("exact_value"));
    v.counterexample = std::move(ce);
  }
  if (j.contains("base_witness")) {
    v.stored_.push_back(read_witness(j.at("base_witness")));
    v.owner_ = j.at("coordinate_owner").get<std::vector<int>>();
  } else if (j.contains("witnesses")) {
    for (const auto& w : j.at("witnesses")) v.stored_.push_back(read_witness(w));
    v.swap_negation_ = j.value("swap_negation", false);
  }
  return v;
}

/// A self-contained certificate: class, gamma and verdict.
inline Json shatter_certificate(const ConceptClassOracle& o, const Margin& gamma, const ShatterVerdict& v) {
  Json j;
  j["type"] = "shatter-certificate";
  j["class"] = class_json(o);
  j["gamma"] = gamma.value();
  j["gamma_squared"] = rational_json(gamma.squared());
  j["verdict"] = shatter_json(v);
  return j;
}

struct RecheckResult {
  bool ok = false;
  std::string detail;
};

/// Re-evaluates a shatter certificate without optimization: each stored
/// witness against its pattern, or the counterexample's weights against the
/// class support. Marginal verdicts carry nothing to check and pass.
inline RecheckResult recheck_shatter_certificate(const Json& cert, double tol = 1e-7) {
  const ConceptClassOracle o = read_class(cert.at("class"));
  const double gamma = cert.at("gamma").get<double>();
  const ShatterVerdict v = read_shatter(cert.at("verdict"));
  const std::size_t n = v.points.size();
  if (v.status == ShatterStatus::Shattered) {
    if (v.stored_witnesses() == 0) return {false, "no witnesses stored"};
    // A reduced verdict derives every witness from one by sign flips. The
    // disjoint supports that justify this are recomputed, and the first 2^b
    // patterns re-evaluated, b <= 12 and 2^b n <= 2^22.
    std::size_t bits = n;
    if (v.symmetry_reduced) {
      if (auto* db = std::get_if<DualBallClass>(&o)) {
        const auto owner = detail::disjoint_owners(*db, v.points);
        if (!owner || *owner != v.owner_) return {false, "coordinate owners do not match the point supports"};
      } else if (!std::holds_alternative<PhiClass>(o)) {
        return {false, "symmetry reduction claimed for a class without it"};
      }
      bits = std::min<std::size_t>(n, 12);
      while (bits > 0 && (std::uint64_t{1} << bits) * n > (std::uint64_t{1} << 22)) --bits;
    }
    const std::uint64_t count = std::uint64_t{1} << bits;
    for (std::uint64_t k = 0; k < count; ++k)
      if (!verify_witness(o, make_sample(v.points, sign_pattern(n, k)), v.witness_for(k), gamma, tol))
        return {false, "witness for pattern " + std::to_string(k) + " fails"};
    return {true, "witnesses re-evaluated"};
  }
  if (v.status == ShatterStatus::NotShattered) {
    const auto& c = *v.counterexample;
    const LabeledSample s = make_sample(v.points, c.labels);
    if (auto* bp = std::get_if<BallPairClass>(&o))
      return {!ball_pair_realizable(bp->space, s, bp->params), "no center realizes the labeling"};
    if (auto* db = std::get_if<DualBallClass>(&o)) {
      std::vector<Vector> pts;
      for (auto p : v.points) pts.push_back(db->points[p]);
      if (!c.exact_lambda.empty()) {
        std::vector<std::vector<Rational>> ex;
        const auto all = db->rational_points();
        for (auto p : v.points) ex.push_back(all[p]);
        const Margin g = Margin::sqrt_of(read_rational(cert.at("gamma_squared")));
        return {verify_collapse(ex, db->norm, c.exact_lambda, g), "exact collapse re-evaluated"};
      }
      return {verify_collapse(pts, db->norm, c.lambda, gamma), "collapse re-evaluated"};
    }
    if (std::holds_alternative<LipschitzClass>(o) || std::holds_alternative<PhiClass>(o) ||
        std::holds_alternative<DistanceCombinationClass>(o) || std::holds_alternative<PolytopeClass>(o)) {
      if (!c.collapse.exact_mu.empty() && c.collapse.exact_value) {
        const Margin g = Margin::sqrt_of(read_rational(cert.at("gamma_squared")));
        Rational value = *c.collapse.exact_value;
        if (auto* poly = std::get_if<PolytopeClass>(&o)) {
          // Support of the exact weights, maximized over the vertices.
          for (std::size_t k = 0; k < poly->vertices.size(); ++k) {
            Rational t = 0;
            for (std::size_t i = 0; i < v.points.size(); ++i)
              t += c.collapse.exact_mu[i] * c.labels[i] * poly->vertices[k][v.points[i]];
            if (k == 0 || t > value) value = t;
          }
          Rational total = 0;
          for (const auto& m : c.collapse.exact_mu) {
            if (m < 0) return {false, "negative collapse weight"};
            total += m;
          }
          if (total <= 0) return {false, "collapse weights sum to zero"};
          value /= total;
        }
        // Exact decisions: value < gamma.
        return {!g.at_most(value) && support_value(o, s, c.collapse.mu) <= gamma + tol, "exact collapse re-evaluated"};
      }
      return {verify_collapse_support(o, s, c.collapse, gamma, 0.0), "collapse support re-evaluated"};
    }
    return {false, "no collapse certificate for this class"};
  }
  return {true, "marginal verdict"};
}

// ---------------------------------------------------------------------------
// Bundles

inline Json bundle_json(const ConstructionBundle& b) {
  Json j;
  j["type"] = "construction-bundle";
  j["construction"] = b.name;
  j["params"] = b.params;
  if (auto* v = std::get_if<VectorSetObject>(&b.object)) {
    j["object_type"] = "vectors";
    j["object"] = vector_set_json(*v);
  } else if (auto* m = std::get_if<MetricObject>(&b.object)) {
    j["object_type"] = "metric";
    j["object"] = metric_json(*m, true);
  } else {
    j["object_type"] = "phi";
    j["object"] = phi_json(std::get<PhiSpec>(b.object));
  }
  if (b.predicted_gamma) j["predicted_gamma"] = *b.predicted_gamma;
  if (b.predicted_gamma_squared) j["predicted_gamma_squared"] = rational_json(*b.predicted_gamma_squared);
  j["predicted_status"] = to_string(b.predicted_status);
  j["provenance"] = b.provenance;
  if (!b.focus.empty()) j["focus"] = b.focus;
  j["notices"] = b.notices;
  if (!b.witnesses.empty()) {
    Json w = Json::array();
    for (const auto& nw : b.witnesses) {
      Json e;
      e["name"] = nw.name;
      e["points"] = nw.points;
      e["labels"] = nw.labels;
      e["witness"] = witness_json(nw.witness);
      w.push_back(std::move(e));
    }
    j["witnesses"] = std::move(w);
  }
  return j;
}

inline ConstructionBundle read_bundle(const Json& j) {
  ConstructionBundle b;
  b.name = j.value("construction", std::string());
  if (j.contains("params"))
    for (const auto& [k, v] : j.at("params").items()) b.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
  const std::string type = j.at("object_type").get<std::string>();
  if (type == "vectors") b.object = read_vector_set(j.at("object"));
  else if (type == "metric") b.object = read_metric_object(j.at("object"));
  else if (type == "phi") b.object = read_phi(j.at("object"));
  else throw InputError("bundle: unknown object_type '" + type + "'");
  if (j.contains("predicted_gamma")) b.predicted_gamma = read_double(j.at("predicted_gamma"));
  if (j.contains("predicted_gamma_squared")) b.predicted_gamma_squared = read_rational(j.at("predicted_gamma_squared"));
  const std::string st = j.value("predicted_status", std::string("Shattered"));
  if (st == "Shattered") b.predicted_status = PredictedStatus::Shattered;
  else if (st == "NotShattered") b.predicted_status = PredictedStatus::NotShattered;
  else if (st == "MetricValid") b.predicted_status = PredictedStatus::MetricValid;
  else if (st == "MetricInvalid") b.predicted_status = PredictedStatus::MetricInvalid;
  else throw InputError("bundle: unknown predicted_status '" + st + "'");
  b.provenance = j.value("provenance", std::string());
  if (j.contains("focus")) b.focus = j.at("focus").get<std::vector<std::size_t>>();
  if (j.contains("notices")) b.notices = j.at("notices").get<std::vector<std::string>>();
  if (j.contains("witnesses"))
    for (const auto& e : j.at("witnesses"))
      b.witnesses.push_back({e.at("name").get<std::string>(), e.at("points").get<std::vector<std::size_t>>(),
                             e.at("labels").get<std::vector<int>>(), read_witness(e.at("witness"))});
  return b;
}

// ---------------------------------------------------------------------------
// Reports

inline Json dim_report_json(const DimensionReport& r) {
  Json j;
  j["label"] = r.label;
  Json e = Json::array();
  for (const auto& x : r.sorted()) e.push_back({{"gamma", x.gamma}, {"dim", x.dim}, {"status", to_string(x.status)}});
  j["entries"] = std::move(e);
  j["monotone"] = r.monotone();
  if (r.fit) {
    j["fit"] = {{"exponent", r.fit->exponent},
                {"intercept", r.fit->intercept},
                {"residual", r.fit->residual},
                {"threshold", r.fit->threshold},
                {"super_polynomial", r.fit->super_polynomial}};
  }
  return j;
}

inline Json packing_json(const PackingResult& p, const std::vector<std::string>& ids) {
  Json j;
  j["size"] = p.size;
  j["subset"] = p.subset;
  Json names = Json::array();
  for (auto i : p.subset) names.push_back(ids.at(i));
  j["ids"] = std::move(names);
  return j;
}

inline Json audit_json(const AuditResult& a) {
  Json j;
  Json rows = Json::array();
  for (const auto& r : a.rows)
    rows.push_back({{"gamma1", r.gamma1}, {"gamma2", r.gamma2}, {"product", r.product},
                    {"lhs", r.lhs}, {"rhs", r.rhs}, {"pass", r.pass}});
  j["rows"] = std::move(rows);
  j["notices"] = a.notices;
  j["all_pass"] = a.all_pass();
  return j;
}

}  // namespace marginlab
