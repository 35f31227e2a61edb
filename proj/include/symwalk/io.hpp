#pragma once

#include <symwalk/applications.hpp>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace symwalk {

using Json = nlohmann::json;

enum class FileFormat { xyz, obj, json };

inline FileFormat format_from_path(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".xyz" || ext == ".txt") return FileFormat::xyz;
  if (ext == ".obj") return FileFormat::obj;
  if (ext == ".json") return FileFormat::json;
  throw Error(ErrorKind::invalid_argument, "cannot tell the format of '" + path + "' (use .xyz, .obj or .json)");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

inline Json parse_json(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::parse, where + ": " + e.what());
  }
}

inline Json load_json(const std::string& path) { return parse_json(read_file(path), path); }

inline void save_json(const std::string& path, const Json& j) { write_file(path, j.dump(1) + "\n"); }

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

inline double to_double(const std::string& tok, const std::string& where, std::size_t line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || !std::isfinite(v))
    throw Error(ErrorKind::parse, where + ":" + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

inline std::string strip_comment(const std::string& line) {
  const auto h = line.find('#');
  return h == std::string::npos ? line : line.substr(0, h);
}

template <int D>
Vec<D> vec_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(D))
    throw Error(ErrorKind::parse, what + ": expected an array of " + std::to_string(D) + " numbers");
  Vec<D> v;
  for (int i = 0; i < D; ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::parse, what + ": expected numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

template <int D>
Json vec_to_json(const Vec<D>& v) {
  Json a = Json::array();
  for (int i = 0; i < D; ++i) a.push_back(v[i]);
  return a;
}

// Field access with parse errors instead of library exceptions.
inline const Json& field(const Json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorKind::parse, what + ": missing \"" + key + "\"");
  return j.at(key);
}

inline double number(const Json& j, const char* key, const std::string& what) {
  const Json& v = field(j, key, what);
  if (!v.is_number()) throw Error(ErrorKind::parse, what + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

}  // namespace detail

// --- planes and ground truth ----------------------------------------------

template <int D>
Json plane_to_json(const HoughPlane<D>& p) {
  return Json{{"normal", detail::vec_to_json<D>(p.normal)}, {"offset", p.offset}};
}

template <int D>
HoughPlane<D> plane_from_json(const Json& j, const std::string& what) {
  HoughPlane<D> p{detail::vec_from_json<D>(detail::field(j, "normal", what), what + " normal"),
                  detail::number(j, "offset", what)};
  const double n = p.normal.norm();
  if (!(n > 0)) throw Error(ErrorKind::parse, what + ": zero normal");
  p.normal /= n;
  return p.canonical();
}

template <int D>
Json gt_to_json(const GroundTruth<D>& gt) {
  Json s = Json::array();
  for (const auto& p : gt.symmetries) s.push_back(plane_to_json(p.canonical()));
  return Json{{"symmetries", s}, {"source", to_string(gt.source)}};
}

/// Accepts a ground-truth file or a cloud file carrying "gt_symmetries".
template <int D>
GroundTruth<D> gt_from_json(const Json& j, const std::string& what) {
  GroundTruth<D> gt;
  const Json* list = nullptr;
  if (j.is_object() && j.contains("symmetries")) {
    list = &j.at("symmetries");
    if (j.contains("source")) gt.source = parse_gt_source(j.at("source").get<std::string>());
  } else if (j.is_object() && j.contains("gt_symmetries") && !j.at("gt_symmetries").is_null()) {
    list = &j.at("gt_symmetries");
  } else {
    throw Error(ErrorKind::parse, what + ": no ground-truth symmetries");
  }
  if (!list->is_array()) throw Error(ErrorKind::parse, what + ": symmetries must be an array");
  for (std::size_t i = 0; i < list->size(); ++i)
    gt.symmetries.push_back(plane_from_json<D>((*list)[i], what + " symmetry " + std::to_string(i)));
  return gt;
}

// --- point clouds ----------------------------------------------------------

template <int D>
Json cloud_to_json(const PointCloud<D>& c, const std::vector<HoughPlane<D>>* gt = nullptr) {
  Json pts = Json::array();
  for (const auto& p : c.points) pts.push_back(detail::vec_to_json<D>(p));
  Json out{{"dim", D}, {"points", pts}, {"normals", nullptr}, {"gt_symmetries", nullptr}};
  if (c.has_normals()) {
    Json ns = Json::array();
    for (const auto& n : *c.normals) ns.push_back(detail::vec_to_json<D>(n));
    out["normals"] = ns;
  }
  if (gt) {
    Json s = Json::array();
    for (const auto& p : *gt) s.push_back(plane_to_json(p.canonical()));
    out["gt_symmetries"] = s;
  }
  return out;
}

template <int D>
PointCloud<D> cloud_from_json(const Json& j, const std::string& what) {
  const double dim = detail::number(j, "dim", what);
  if (dim != D)
    throw Error(ErrorKind::invalid_argument,
                what + ": file holds " + std::to_string(static_cast<int>(dim)) +
                    "D points but " + std::to_string(D) + "D was requested");
  const Json& pts = detail::field(j, "points", what);
  if (!pts.is_array()) throw Error(ErrorKind::parse, what + ": points must be an array");
  PointCloud<D> c;
  for (std::size_t i = 0; i < pts.size(); ++i)
    c.points.push_back(detail::vec_from_json<D>(pts[i], what + " point " + std::to_string(i)));
  if (j.contains("normals") && !j.at("normals").is_null()) {
    const Json& ns = j.at("normals");
    if (!ns.is_array() || ns.size() != pts.size())
      throw Error(ErrorKind::parse, what + ": normals must match points one to one");
    std::vector<Vec<D>> normals;
    for (std::size_t i = 0; i < ns.size(); ++i)
      normals.push_back(detail::vec_from_json<D>(ns[i], what + " normal " + std::to_string(i)));
    c.normals = std::move(normals);
  }
  return c;
}

template <int D>
PointCloud<D> parse_xyz(const std::string& text, const std::string& what) {
  PointCloud<D> c;
  std::istringstream in(text);
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const auto tok = detail::split_ws(detail::strip_comment(line));
    if (tok.empty()) continue;
    if (tok.size() != static_cast<std::size_t>(D))
      throw Error(ErrorKind::parse, what + ":" + std::to_string(lineno) + ": expected " +
                                        std::to_string(D) + " columns, found " + std::to_string(tok.size()));
    Vec<D> p;
    for (int i = 0; i < D; ++i) p[i] = detail::to_double(tok[i], what, lineno);
    c.points.push_back(p);
  }
  return c;
}

namespace detail {

// "7", "7/2", "7//3", "7/2/3"; negative indices count from the end.
inline std::pair<long, long> obj_face_ref(const std::string& tok, std::size_t nv, std::size_t nn,
                                          const std::string& what, std::size_t line) {
  auto resolve = [&](const std::string& s, std::size_t count) -> long {
    if (s.empty()) return -1;
    long v = 0;
    std::size_t used = 0;
    try {
      v = std::stol(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || v == 0)
      throw Error(ErrorKind::parse, what + ":" + std::to_string(line) + ": bad face index '" + tok + "'");
    const long idx = v > 0 ? v - 1 : static_cast<long>(count) + v;
    if (idx < 0 || idx >= static_cast<long>(count))
      throw Error(ErrorKind::parse, what + ":" + std::to_string(line) + ": face index out of range '" + tok + "'");
    return idx;
  };
  const auto s1 = tok.find('/');
  const std::string v = tok.substr(0, s1);
  long n = -1;
  if (s1 != std::string::npos) {
    const auto s2 = tok.find('/', s1 + 1);
    if (s2 != std::string::npos) n = resolve(tok.substr(s2 + 1), nn);
  }
  return {resolve(v, nv), n};
}

}  // namespace detail

/// OBJ vertices. Normals come from face-referenced `vn` records when present,
/// otherwise from area-weighted face normals; point-only files get none.
inline PointCloud<3> parse_obj(const std::string& text, const std::string& what) {
  std::vector<Vec<3>> verts, vns;
  std::vector<std::vector<std::pair<long, long>>> faces;
  std::istringstream in(text);
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const auto tok = detail::split_ws(detail::strip_comment(line));
    if (tok.empty()) continue;
    if (tok[0] == "v" || tok[0] == "vn") {
      // "v x y z [w]" / "v x y z r g b" are both seen in the wild
      if (tok.size() < 4)
        throw Error(ErrorKind::parse, what + ":" + std::to_string(lineno) + ": expected 3 coordinates");
      Vec<3> p;
      for (int i = 0; i < 3; ++i) p[i] = detail::to_double(tok[i + 1], what, lineno);
      (tok[0] == "v" ? verts : vns).push_back(p);
    } else if (tok[0] == "f") {
      if (tok.size() < 4)
        throw Error(ErrorKind::parse, what + ":" + std::to_string(lineno) + ": face needs 3 vertices");
      std::vector<std::pair<long, long>> f;
      for (std::size_t i = 1; i < tok.size(); ++i)
        f.push_back(detail::obj_face_ref(tok[i], verts.size(), vns.size(), what, lineno));
      faces.push_back(std::move(f));
    }
  }
  PointCloud<3> c;
  c.points = verts;
  if (faces.empty()) {
    if (!vns.empty() && vns.size() == verts.size()) c.normals = vns;
    return c;
  }
  std::vector<Vec<3>> acc(verts.size(), Vec<3>::Zero());
  bool from_vn = true;
  for (const auto& f : faces)
    for (const auto& r : f) from_vn = from_vn && r.second >= 0;
  for (const auto& f : faces) {
    if (from_vn) {
      for (const auto& r : f) acc[r.first] += vns[r.second];
      continue;
    }
    // fan triangulation; the cross product carries twice the triangle area
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
      const Vec<3>& a = verts[f[0].first];
      const Vec<3> n = (verts[f[i].first] - a).cross(verts[f[i + 1].first] - a);
      for (long v : {f[0].first, f[i].first, f[i + 1].first}) acc[v] += n;
    }
  }
  for (auto& n : acc) {
    const double len = n.norm();
    n = len > 0 ? Vec<3>(n / len) : Vec<3>::Zero();
  }
  c.normals = std::move(acc);
  return c;
}

template <int D>
PointCloud<D> load_cloud(const std::string& path) {
  const std::string text = read_file(path);
  switch (format_from_path(path)) {
    case FileFormat::xyz: return parse_xyz<D>(text, path);
    case FileFormat::obj:
      if constexpr (D == 3) {
        return parse_obj(text, path);
      } else {
        throw Error(ErrorKind::invalid_argument, path + ": OBJ files are 3D");
      }
    case FileFormat::json: return cloud_from_json<D>(parse_json(text, path), path);
  }
  throw Error(ErrorKind::invalid_argument, "unsupported format");
}

template <int D>
void save_cloud(const std::string& path, const PointCloud<D>& c,
                const std::vector<HoughPlane<D>>* gt = nullptr) {
  switch (format_from_path(path)) {
    case FileFormat::xyz: {
      std::string out;
      for (const auto& p : c.points) {
        for (int i = 0; i < D; ++i) out += (i ? " " : "") + detail::fmt17(p[i]);
        out += '\n';
      }
      write_file(path, out);
      return;
    }
    case FileFormat::obj: {
      if constexpr (D != 3) throw Error(ErrorKind::invalid_argument, path + ": OBJ files are 3D");
      std::string out;
      for (const auto& p : c.points)
        out += "v " + detail::fmt17(p[0]) + " " + detail::fmt17(p[1]) + " " + detail::fmt17(p[D - 1]) + "\n";
      if (c.has_normals())
        for (const auto& n : *c.normals)
          out += "vn " + detail::fmt17(n[0]) + " " + detail::fmt17(n[1]) + " " + detail::fmt17(n[D - 1]) + "\n";
      write_file(path, out);
      return;
    }
    case FileFormat::json: save_json(path, cloud_to_json(c, gt)); return;
  }
}

/// Dimension stored in a file: the "dim" field of JSON, 3 for OBJ, the
/// column count of the first data line for xyz.
inline int file_dim(const std::string& path) {
  switch (format_from_path(path)) {
    case FileFormat::obj: return 3;
    case FileFormat::json: {
      const Json j = load_json(path);
      return static_cast<int>(detail::number(j, "dim", path));
    }
    case FileFormat::xyz: {
      std::istringstream in(read_file(path));
      for (std::string line; std::getline(in, line);) {
        const auto tok = detail::split_ws(detail::strip_comment(line));
        if (!tok.empty()) return static_cast<int>(tok.size());
      }
      throw Error(ErrorKind::parse, path + ": no points");
    }
  }
  return 0;
}

// --- transformation spaces and traces ---------------------------------------

template <int D>
Json space_to_json(const TransformSpace<D>& s) {
  Json pts = Json::array();
  for (const auto& p : s.samples) pts.push_back(detail::vec_to_json<D>(p));
  return Json{{"kind", to_string(s.kind)}, {"k", s.k}, {"dim", D}, {"samples", pts}};
}

template <int D>
TransformSpace<D> space_from_json(const Json& j, const std::string& what) {
  TransformSpace<D> s;
  const Json& kind = detail::field(j, "kind", what);
  if (!kind.is_string()) throw Error(ErrorKind::parse, what + ": kind must be a string");
  s.kind = parse_space_kind(kind.get<std::string>());
  s.k = detail::number(j, "k", what);
  if (detail::number(j, "dim", what) != D) throw Error(ErrorKind::invalid_argument, what + ": dimension mismatch");
  const Json& pts = detail::field(j, "samples", what);
  for (std::size_t i = 0; i < pts.size(); ++i)
    s.samples.push_back(detail::vec_from_json<D>(pts[i], what + " sample " + std::to_string(i)));
  return s;
}

template <int D>
std::string trace_to_jsonl(const WalkerTrace<D>& t) {
  std::string out;
  for (const auto& r : t.records)
    out += Json{{"walker", r.walker}, {"step", r.step}, {"x", detail::vec_to_json<D>(r.x)}}.dump() + "\n";
  return out;
}

template <int D>
std::vector<typename WalkerTrace<D>::Record> trace_from_jsonl(const std::string& text,
                                                             const std::string& what) {
  std::vector<typename WalkerTrace<D>::Record> out;
  std::istringstream in(text);
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (detail::split_ws(line).empty()) continue;
    const std::string where = what + ":" + std::to_string(lineno);
    const Json j = parse_json(line, where);
    const double w = detail::number(j, "walker", where), s = detail::number(j, "step", where);
    if (w < 0 || s < 0) throw Error(ErrorKind::parse, where + ": negative walker or step");
    out.push_back({static_cast<std::size_t>(w), static_cast<std::size_t>(s),
                   detail::vec_from_json<D>(detail::field(j, "x", where), where)});
  }
  return out;
}

// --- detection results -------------------------------------------------------

template <int D>
Json result_to_json(const SymmetryResult<D>& r) {
  Json j;
  if (r.kind == SymmetryKind::reflective) {
    j["normal"] = detail::vec_to_json<D>(r.plane.normal);
    j["offset"] = r.plane.offset;
  } else {
    j["shift"] = detail::vec_to_json<D>(r.shift);
  }
  j["significance"] = r.significance;
  j["raw_significance"] = r.raw_significance;
  j["support"] = r.support;
  j["cluster_size"] = r.cluster_size;
  return j;
}

template <int D>
Json results_to_json(const std::string& method, SymmetryKind kind,
                     const std::vector<SymmetryResult<D>>& results) {
  Json s = Json::array();
  for (const auto& r : results) s.push_back(result_to_json(r));
  return Json{{"method", method},
              {"kind", kind == SymmetryKind::reflective ? "reflective" : "translational"},
              {"dim", D},
              {"symmetries", s}};
}

template <int D>
std::vector<SymmetryResult<D>> results_from_json(const Json& j, const std::string& what) {
  const Json& list = detail::field(j, "symmetries", what);
  if (!list.is_array()) throw Error(ErrorKind::parse, what + ": symmetries must be an array");
  std::vector<SymmetryResult<D>> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Json& e = list[i];
    const std::string w = what + " symmetry " + std::to_string(i);
    SymmetryResult<D> r;
    if (e.contains("shift")) {
      r.kind = SymmetryKind::translational;
      r.shift = detail::vec_from_json<D>(e.at("shift"), w);
    } else {
      r.plane = plane_from_json<D>(e, w);
    }
    if (e.contains("significance")) r.significance = e.at("significance").get<double>();
    if (e.contains("raw_significance")) r.raw_significance = e.at("raw_significance").get<double>();
    if (e.contains("support")) r.support = e.at("support").get<std::vector<std::size_t>>();
    if (e.contains("cluster_size")) r.cluster_size = e.at("cluster_size").get<std::size_t>();
    out.push_back(std::move(r));
  }
  return out;
}

// --- metrics and compression -------------------------------------------------

inline Json report_to_json(const EvalReport& r) {
  Json m = Json::array();
  for (const auto& x : r.matches) m.push_back(Json{{"pred", x.pred}, {"gt", x.gt}, {"distance", x.distance}});
  return Json{{"delta", r.delta},       {"precision", r.precision},
              {"recall", r.recall},     {"f1", r.f1},
              {"association", r.association}, {"compression_ratio", r.compression_ratio},
              {"num_pred", r.num_pred}, {"num_gt", r.num_gt},
              {"matches", m}};
}

template <int D>
Json compressed_to_json(const Compressed<D>& c) {
  Json pts = Json::array(), planes = Json::array();
  for (const auto& p : c.points) pts.push_back(detail::vec_to_json<D>(p));
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    const auto& st = c.stages[i];
    Json pairs = Json::array();
    for (const auto& [a, b] : st.pairs) pairs.push_back(Json::array({a, b}));
    Json pj = plane_to_json(st.plane);
    pj["order"] = i;
    pj["pairs"] = pairs;
    pj["remaining"] = st.remaining;
    planes.push_back(pj);
  }
  return Json{{"dim", D},      {"original_size", c.original_size}, {"ratio", c.ratio},
              {"kept", c.kept}, {"points", pts},                   {"planes", planes}};
}

template <int D>
Compressed<D> compressed_from_json(const Json& j, const std::string& what) {
  Compressed<D> c;
  if (detail::number(j, "dim", what) != D) throw Error(ErrorKind::invalid_argument, what + ": dimension mismatch");
  c.original_size = static_cast<std::size_t>(detail::number(j, "original_size", what));
  c.ratio = detail::number(j, "ratio", what);
  c.kept = detail::field(j, "kept", what).get<std::vector<std::size_t>>();
  const Json& pts = detail::field(j, "points", what);
  for (std::size_t i = 0; i < pts.size(); ++i) c.points.push_back(detail::vec_from_json<D>(pts[i], what));
  std::vector<std::pair<std::size_t, CompressionStage<D>>> stages;
  for (const Json& pj : detail::field(j, "planes", what)) {
    CompressionStage<D> st;
    st.plane = plane_from_json<D>(pj, what + " plane");
    st.remaining = static_cast<std::size_t>(detail::number(pj, "remaining", what));
    for (const Json& pr : detail::field(pj, "pairs", what)) {
      const auto v = pr.get<std::vector<std::size_t>>();
      if (v.size() != 2) throw Error(ErrorKind::parse, what + ": pairs hold two indices");
      st.pairs.emplace_back(v[0], v[1]);
    }
    stages.emplace_back(static_cast<std::size_t>(detail::number(pj, "order", what)), std::move(st));
  }
  std::sort(stages.begin(), stages.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& s : stages) c.stages.push_back(std::move(s.second));
  return c;
}

/// 64-bit FNV-1a, used to fingerprint inputs in run manifests.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace symwalk
