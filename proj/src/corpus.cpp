#include "brepforge/corpus.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "brepforge/error.hpp"
#include "brepforge/serialize.hpp"
#include "brepforge/validate.hpp"

namespace brepforge {

using nlohmann::json;

namespace {

json geometry_to_json(const GeometryAttrs& g) {
  json j;
  auto& boxes = j["face_boxes"] = json::array();
  for (const auto& b : g.face_boxes)
    for (double v : b) boxes.push_back(v);
  auto& verts = j["verts"] = json::array();
  for (const auto& v : g.verts) {
    verts.push_back(v.x);
    verts.push_back(v.y);
    verts.push_back(v.z);
  }
  auto& ec = j["edge_ctrl"] = json::array();
  for (const auto& e : g.edge_ctrl)
    for (const auto& p : e) {
      ec.push_back(p.x);
      ec.push_back(p.y);
      ec.push_back(p.z);
    }
  auto& fc = j["face_ctrl"] = json::array();
  for (const auto& f : g.face_ctrl)
    for (const auto& p : f) {
      fc.push_back(p.x);
      fc.push_back(p.y);
      fc.push_back(p.z);
    }
  return j;
}

GeometryAttrs geometry_from_json(const json& j, const Topology& t, const std::string& id) {
  GeometryAttrs g;
  const auto& boxes = j.at("face_boxes");
  const auto& verts = j.at("verts");
  const auto& ec = j.at("edge_ctrl");
  const auto& fc = j.at("face_ctrl");
  if (boxes.size() != static_cast<size_t>(t.num_faces) * 6 ||
      verts.size() != static_cast<size_t>(t.num_verts) * 3 ||
      ec.size() != static_cast<size_t>(t.num_edges) * 12 ||
      fc.size() != static_cast<size_t>(t.num_faces) * 48)
    raise(ErrorCode::InvalidRecord, "record " + id + ": geometry shapes do not match counts");
  g.face_boxes.resize(t.num_faces);
  for (int f = 0; f < t.num_faces; ++f)
    for (int k = 0; k < 6; ++k) g.face_boxes[f][k] = boxes[f * 6 + k].get<double>();
  g.verts.resize(t.num_verts);
  for (int v = 0; v < t.num_verts; ++v)
    g.verts[v] = {verts[v * 3].get<double>(), verts[v * 3 + 1].get<double>(),
                  verts[v * 3 + 2].get<double>()};
  g.edge_ctrl.resize(t.num_edges);
  for (int e = 0; e < t.num_edges; ++e)
    for (int k = 0; k < 4; ++k)
      g.edge_ctrl[e][k] = {ec[e * 12 + 3 * k].get<double>(), ec[e * 12 + 3 * k + 1].get<double>(),
                           ec[e * 12 + 3 * k + 2].get<double>()};
  g.face_ctrl.resize(t.num_faces);
  for (int f = 0; f < t.num_faces; ++f)
    for (int k = 0; k < 16; ++k)
      g.face_ctrl[f][k] = {fc[f * 48 + 3 * k].get<double>(), fc[f * 48 + 3 * k + 1].get<double>(),
                           fc[f * 48 + 3 * k + 2].get<double>()};
  for (const auto& v : g.verts)
    if (!is_finite(v)) raise(ErrorCode::InvalidRecord, "record " + id + ": non-finite vertex");
  return g;
}

json record_to_json(const CorpusRecord& r) {
  json j;
  j["id"] = r.id;
  j["num_faces"] = r.topology.num_faces;
  j["num_edges"] = r.topology.num_edges;
  j["num_verts"] = r.topology.num_verts;
  auto& ef = j["ef"] = json::array();
  auto& ev = j["ev"] = json::array();
  for (const auto& row : r.topology.ef) {
    ef.push_back(row[0]);
    ef.push_back(row[1]);
  }
  for (const auto& row : r.topology.ev) {
    ev.push_back(row[0]);
    ev.push_back(row[1]);
  }
  if (r.geometry) j["geometry"] = geometry_to_json(*r.geometry);
  return j;
}

CorpusRecord record_from_json(const json& j) {
  CorpusRecord r;
  r.id = j.value("id", "");
  const auto& ef = j.at("ef");
  const auto& ev = j.at("ev");
  if (ef.size() != ev.size() || ef.size() % 2 != 0)
    raise(ErrorCode::InvalidRecord, "record " + r.id + ": malformed ef/ev arrays");
  std::vector<IdPair> ef_rows(ef.size() / 2), ev_rows(ev.size() / 2);
  for (size_t i = 0; i < ef_rows.size(); ++i) {
    ef_rows[i] = {ef[2 * i].get<int>(), ef[2 * i + 1].get<int>()};
    ev_rows[i] = {ev[2 * i].get<int>(), ev[2 * i + 1].get<int>()};
  }
  try {
    r.topology = build_topology(std::move(ef_rows), std::move(ev_rows));
  } catch (const Error& e) {
    raise(ErrorCode::InvalidRecord, "record " + r.id + ": " + e.what());
  }
  const auto report = validate(r.topology);
  if (!report.valid()) {
    std::ostringstream msg;
    msg << "record " << r.id << " fails validation:";
    for (const auto& v : report.violations) {
      msg << " " << v.constraint << "(";
      for (size_t i = 0; i < v.ids.size(); ++i) msg << (i ? "," : "") << v.ids[i];
      msg << ")";
    }
    raise(ErrorCode::InvalidRecord, msg.str());
  }
  if (j.at("num_faces").get<int>() != r.topology.num_faces ||
      j.at("num_edges").get<int>() != r.topology.num_edges ||
      j.at("num_verts").get<int>() != r.topology.num_verts)
    raise(ErrorCode::InvalidRecord, "record " + r.id + ": stored counts disagree with pairs");
  if (j.contains("geometry") && !j["geometry"].is_null())
    r.geometry = geometry_from_json(j["geometry"], r.topology, r.id);
  return r;
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::ParseError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::ParseError, std::string(e.what()));
  }
}

void check_schema(const json& j, const std::string& path) {
  const int version = j.value("schema_version", -1);
  if (version != kCorpusSchemaVersion)
    raise(ErrorCode::SchemaVersionMismatch,
          path + ": schema_version " + std::to_string(version) + ", expected " +
              std::to_string(kCorpusSchemaVersion));
}

}  // namespace

std::vector<CorpusRecord> load_corpus(const std::string& path) {
  const json j = parse_file(path);
  check_schema(j, path);
  std::vector<CorpusRecord> records;
  for (const auto& rj : j.at("records")) records.push_back(record_from_json(rj));
  return records;
}

void save_corpus(const std::vector<CorpusRecord>& records, const std::string& path) {
  json j;
  j["schema_version"] = kCorpusSchemaVersion;
  auto& arr = j["records"] = json::array();
  for (const auto& r : records) arr.push_back(record_to_json(r));
  std::ofstream out(path);
  if (!out) raise(ErrorCode::ParseError, "cannot write " + path);
  out << j.dump(1, '\t') << "\n";
}

FilterResult filter_corpus(const std::vector<CorpusRecord>& records, int max_faces,
                           int max_edges_per_face) {
  FilterResult result;
  for (const auto& r : records) {
    if (r.topology.num_faces > max_faces) {
      result.rejected_too_many_faces++;
      continue;
    }
    const auto fe = derive_face_edges(r.topology);
    bool overflow = false;
    for (const auto& edges : fe)
      if (static_cast<int>(edges.size()) > max_edges_per_face) overflow = true;
    if (overflow) {
      result.rejected_face_edge_overflow++;
      continue;
    }
    result.kept.push_back(r);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

Topology raw_prism_topology(int n) {
  // faces: 0 bottom cap, 1 top cap, 2+i side i
  std::vector<IdPair> ef, ev;
  const int bottom = 0, top = 1;
  auto side = [&](int i) { return 2 + ((i % n) + n) % n; };
  auto bv = [&](int i) { return i % n; };
  auto tv = [&](int i) { return n + i % n; };
  for (int i = 0; i < n; ++i) {  // bottom ring
    ef.push_back({bottom, side(i)});
    ev.push_back({bv(i), bv(i + 1)});
  }
  for (int i = 0; i < n; ++i) {  // top ring
    ef.push_back({top, side(i)});
    ev.push_back({tv(i), tv(i + 1)});
  }
  for (int i = 0; i < n; ++i) {  // verticals
    ef.push_back({side(i - 1), side(i)});
    ev.push_back({bv(i), tv(i)});
  }
  return build_topology(std::move(ef), std::move(ev));
}

GeometryAttrs geometry_from_verts(const Topology& t, const std::vector<Vec3>& verts) {
  GeometryAttrs g;
  g.verts = verts;
  g.edge_ctrl.resize(t.num_edges);
  for (int e = 0; e < t.num_edges; ++e) {
    const Vec3 a = verts[t.ev[e][0]];
    const Vec3 b = verts[t.ev[e][1]];
    for (int k = 0; k < 4; ++k) g.edge_ctrl[e][k] = lerp(a, b, k / 3.0);
  }
  g.face_ctrl.resize(t.num_faces);
  g.face_boxes.resize(t.num_faces);
  for (int f = 0; f < t.num_faces; ++f) {
    const auto loops = face_loops(t, f);
    std::vector<Vec3> loop_pts;
    for (int v : loops.at(0)) loop_pts.push_back(verts[v]);
    g.face_ctrl[f] = bilinear_grid(face_anchor_points(loop_pts));
    Box3 box;
    for (const auto& p : g.face_ctrl[f]) box.expand(p);
    for (const auto& loop : loops)
      for (int v : loop) box.expand(verts[v]);
    g.face_boxes[f] = box.flat();
  }
  return g;
}

CorpusRecord make_shape_record(const ShapeWeight& shape, const SynthSpec& spec,
                               std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> half(spec.min_half_extent, spec.max_half_extent);
  std::uniform_real_distribution<double> offset(-spec.max_center_offset, spec.max_center_offset);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);

  const int n = shape.kind == ShapeKind::Box ? 4 : shape.sides;
  const Topology raw = raw_prism_topology(n);
  const Vec3 center{offset(rng), offset(rng), offset(rng)};
  const double hz = half(rng);

  std::vector<Vec3> verts(raw.num_verts);
  if (shape.kind == ShapeKind::Box) {
    const double hx = half(rng);
    const double hy = half(rng);
    for (int i = 0; i < 4; ++i) {
      const double sx = (i == 1 || i == 2) ? 1.0 : -1.0;
      const double sy = (i >= 2) ? 1.0 : -1.0;
      verts[i] = center + Vec3{sx * hx, sy * hy, -hz};
      verts[4 + i] = center + Vec3{sx * hx, sy * hy, hz};
    }
  } else {
    const double r = half(rng);
    const double yaw = angle(rng);
    for (int i = 0; i < n; ++i) {
      const double a = yaw + 2.0 * M_PI * i / n;
      verts[i] = center + Vec3{r * std::cos(a), r * std::sin(a), -hz};
      verts[n + i] = center + Vec3{r * std::cos(a), r * std::sin(a), hz};
    }
  }

  const CanonicalResult canon = canonicalize_with_maps(raw);
  std::vector<Vec3> canon_verts(verts.size());
  for (size_t v = 0; v < verts.size(); ++v) canon_verts[canon.vert_map[v]] = verts[v];

  CorpusRecord r;
  char id[32];
  std::snprintf(id, sizeof(id), "synth-%06d", index);
  r.id = id;
  r.topology = canon.topology;
  r.geometry = geometry_from_verts(canon.topology, canon_verts);
  return r;
}

}  // namespace

std::vector<CorpusRecord> gen_synthetic_corpus(const SynthSpec& spec, uint64_t seed) {
  if (spec.n_models < 1) raise(ErrorCode::BadSpec, "n_models must be >= 1");
  if (spec.mix.empty()) raise(ErrorCode::BadSpec, "shape mix is empty");
  double total_weight = 0.0;
  for (const auto& s : spec.mix) {
    if (s.weight <= 0.0) raise(ErrorCode::BadSpec, "shape weights must be positive");
    if (s.kind == ShapeKind::Prism && s.sides < 3)
      raise(ErrorCode::BadSpec, "prisms need at least 3 sides");
    total_weight += s.weight;
  }
  if (!(spec.min_half_extent > 0.0 && spec.min_half_extent <= spec.max_half_extent &&
        spec.max_half_extent + spec.max_center_offset <= 1.0))
    raise(ErrorCode::BadSpec, "size ranges must keep coordinates inside [-1,1]");

  std::vector<double> weights;
  for (const auto& s : spec.mix) weights.push_back(s.weight / total_weight);

  std::vector<CorpusRecord> records;
  records.reserve(spec.n_models);
  for (int i = 0; i < spec.n_models; ++i) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    records.push_back(make_shape_record(spec.mix[pick(rng)], spec, rng, i));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Model bundle

namespace {

json count_model_to_json(const CountModel& m) {
  json j;
  j["order"] = m.order();
  j["alphabet"] = m.alphabet();
  auto& tables = j["tables"] = json::array();
  for (const auto& e : m.export_tables()) {
    json ej;
    ej["key"] = e.key;
    auto& counts = ej["counts"] = json::array();
    for (const auto& [tok, c] : e.counts) counts.push_back(json::array({tok, c}));
    tables.push_back(std::move(ej));
  }
  return j;
}

CountModel count_model_from_json(const json& j) {
  std::vector<CountModel::TableEntry> entries;
  for (const auto& ej : j.at("tables")) {
    CountModel::TableEntry e;
    e.key = ej.at("key").get<std::vector<int>>();
    for (const auto& c : ej.at("counts"))
      e.counts.emplace_back(c[0].get<int>(), c[1].get<int>());
    entries.push_back(std::move(e));
  }
  return CountModel::from_tables(j.at("order").get<int>(),
                                 j.at("alphabet").get<std::vector<int>>(), entries);
}

json denoiser_to_json(const ToyDenoiser& d) {
  const auto& p = d.params();
  json j;
  j["stage"] = static_cast<int>(p.stage);
  j["in_dim"] = p.in_dim;
  j["hidden"] = p.hidden;
  j["out_dim"] = p.out_dim;
  j["t_embed_dim"] = p.t_embed_dim;
  j["index_embed_dim"] = p.index_embed_dim;
  j["w1"] = p.w1;
  j["b1"] = p.b1;
  j["w2"] = p.w2;
  j["b2"] = p.b2;
  j["ws"] = p.ws;
  j["alpha_bar"] = p.alpha_bar;
  return j;
}

ToyDenoiser denoiser_from_json(const json& j) {
  ToyDenoiser::Params p;
  p.stage = static_cast<Stage>(j.at("stage").get<int>());
  p.in_dim = j.at("in_dim").get<int>();
  p.hidden = j.at("hidden").get<int>();
  p.out_dim = j.at("out_dim").get<int>();
  p.t_embed_dim = j.at("t_embed_dim").get<int>();
  p.index_embed_dim = j.at("index_embed_dim").get<int>();
  p.w1 = j.at("w1").get<std::vector<double>>();
  p.b1 = j.at("b1").get<std::vector<double>>();
  p.w2 = j.at("w2").get<std::vector<double>>();
  p.b2 = j.at("b2").get<std::vector<double>>();
  p.ws = j.at("ws").get<std::vector<double>>();
  p.alpha_bar = j.at("alpha_bar").get<std::vector<double>>();
  return ToyDenoiser(std::move(p));
}

}  // namespace

void save_model_bundle(const ModelBundle& bundle, const std::string& path) {
  json j;
  j["schema_version"] = kCorpusSchemaVersion;
  j["kind"] = "model-bundle";
  j["m_f"] = bundle.m_f;
  j["max_shared"] = bundle.max_shared;
  j["ef_model"] = count_model_to_json(bundle.ef_model);
  j["ev_model"] = count_model_to_json(bundle.ev_model);
  auto& dn = j["denoisers"] = json::array();
  for (const auto& d : bundle.denoisers) dn.push_back(denoiser_to_json(d));
  std::ofstream out(path);
  if (!out) raise(ErrorCode::ParseError, "cannot write " + path);
  out << j.dump() << "\n";
}

ModelBundle load_model_bundle(const std::string& path) {
  const json j = parse_file(path);
  check_schema(j, path);
  if (j.value("kind", "") != "model-bundle")
    raise(ErrorCode::ParseError, path + " is not a model bundle");
  ModelBundle b;
  b.m_f = j.at("m_f").get<int>();
  b.max_shared = j.at("max_shared").get<int>();
  b.ef_model = count_model_from_json(j.at("ef_model"));
  b.ev_model = count_model_from_json(j.at("ev_model"));
  for (const auto& dj : j.at("denoisers")) b.denoisers.push_back(denoiser_from_json(dj));
  return b;
}

}  // namespace brepforge
