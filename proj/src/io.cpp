#include "splatreach/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace splatreach {

namespace {

Vec3 vec3(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json arr(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json arr(const VecX& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

VecX vecx(const Json& j) {
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

template <typename T>
void get_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Json primitive_to_json(const Primitive& p) {
  Json j;
  j["type"] = p.type == PrimitiveType::kBox ? "box" : "cylinder";
  j["pose"] = pose_to_json(p.pose);
  j["dims"] = p.type == PrimitiveType::kBox ? arr(p.dims) : Json::array({p.dims.x(), p.dims.y()});
  return j;
}

Primitive primitive_from_json(const Json& j) {
  Primitive p;
  const std::string type = j.at("type").get<std::string>();
  p.pose = pose_from_json(j.at("pose"));
  const Json& d = j.at("dims");
  if (type == "box") {
    p.type = PrimitiveType::kBox;
    p.dims = vec3(d);
  } else if (type == "cylinder") {
    p.type = PrimitiveType::kCylinder;
    if (!d.is_array() || d.size() != 2) throw FormatError("cylinder dims are [radius, height]");
    p.dims = Vec3(d[0].get<double>(), d[1].get<double>(), 0.0);
  } else {
    throw FormatError("unknown primitive type '" + type + "'");
  }
  return p;
}

Json state_to_json(const RobotState& s) {
  return {{"x", s.x}, {"y", s.y}, {"theta", s.theta}, {"q", arr(s.q_arm)}};
}

RobotState state_from_json(const Json& j) {
  RobotState s;
  s.x = j.at("x").get<double>();
  s.y = j.at("y").get<double>();
  s.theta = j.at("theta").get<double>();
  s.q_arm = vecx(j.at("q"));
  return s;
}

Json sample_to_json(const TrialSample& s) {
  Json j;
  j["t"] = s.time;
  j["state"] = state_to_json(s.state);
  j["ee"] = pose_to_json(s.ee);
  j["clearance"] = s.clearance;
  j["q_dot"] = arr(s.q_dot);
  j["slack"] = s.slack_norm;
  j["inequalities"] = s.inequalities;
  j["active"] = s.active_constraints;
  j["min_distance"] = std::isfinite(s.min_distance) ? Json(s.min_distance) : Json(nullptr);
  j["qp_status"] = to_string(s.qp_status);
  return j;
}

}  // namespace

Pose pose_from_json(const Json& j) {
  const Vec3 t = vec3(j.at("xyz"));
  Mat3 R = Mat3::Identity();
  if (j.contains("quat")) {
    const Json& q = j.at("quat");
    if (!q.is_array() || q.size() != 4) throw FormatError("quat must be [w, x, y, z]");
    Quat qq(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
    if (!(qq.norm() > 0.0)) throw DataError("zero quaternion");
    R = qq.normalized().toRotationMatrix();
  } else if (j.contains("rpy")) {
    const Vec3 rpy = vec3(j.at("rpy"));
    R = rot_z(rpy.z()) * rot_y(rpy.y()) * rot_x(rpy.x());
  }
  return make_pose(R, t);
}

Json pose_to_json(const Pose& p) {
  const Quat q(p.linear());
  return {{"xyz", arr(Vec3(p.translation()))}, {"quat", Json::array({q.w(), q.x(), q.y(), q.z()})}};
}

RobotConfig robot_from_json(const Json& j) {
  RobotConfig rc;
  RobotModel& m = rc.model;
  if (j.contains("base")) {
    get_opt(j.at("base"), "forward_velocity", m.base.forward_velocity);
    get_opt(j.at("base"), "turn_velocity", m.base.turn_velocity);
  }
  if (j.contains("base_mount")) m.base_mount = pose_from_json(j.at("base_mount"));
  if (j.contains("tool")) m.tool = pose_from_json(j.at("tool"));
  const std::string convention = j.value("convention", "modified_dh");
  for (const auto& jj : j.at("joints")) {
    ArmJoint a;
    a.name = jj.value("name", "joint" + std::to_string(m.joints.size()));
    if (convention == "modified_dh") {
      // T = RotX(alpha) TransX(a) RotZ(q) TransZ(d); TransZ commutes with RotZ.
      a.parent = make_pose(rot_x(jj.at("alpha").get<double>()), Vec3::Zero()) *
                 make_pose(Mat3::Identity(), Vec3(jj.at("a").get<double>(), 0.0, 0.0)) *
                 make_pose(Mat3::Identity(), Vec3(0.0, 0.0, jj.at("d").get<double>()));
      a.axis = Vec3::UnitZ();
    } else if (convention == "frames") {
      a.parent = pose_from_json(jj.at("origin"));
      a.axis = vec3(jj.at("axis")).normalized();
      if (jj.value("type", "revolute") == "prismatic") a.type = JointType::kPrismatic;
    } else {
      throw FormatError("unknown joint convention '" + convention + "'");
    }
    a.lower = jj.at("lower").get<double>();
    a.upper = jj.at("upper").get<double>();
    a.velocity = jj.at("velocity").get<double>();
    m.joints.push_back(a);
  }
  const std::string rows = j.value("manipulability_rows", "full");
  m.manipulability_rows =
      rows == "translational" ? ManipulabilityRows::kTranslational : ManipulabilityRows::kFull;
  m.validate();
  for (const auto& s : j.at("spheres")) {
    rc.spheres.push_back({s.at("link").get<int>(), vec3(s.at("offset")), s.at("radius").get<double>()});
  }
  validate_spheres(m, rc.spheres);
  rc.start_q = j.contains("start_q") ? vecx(j.at("start_q")) : VecX::Zero(m.n_arm());
  if (rc.start_q.size() != m.n_arm()) throw FormatError("start_q has the wrong length");
  return rc;
}

ControllerConfig controller_from_json(const Json& j) {
  ControllerConfig c;
  get_opt(j, "k_e", c.k_e);
  get_opt(j, "linear_cap", c.linear_cap);
  get_opt(j, "angular_cap", c.angular_cap);
  get_opt(j, "lambda_base", c.lambda_base);
  get_opt(j, "lambda_arm", c.lambda_arm);
  get_opt(j, "lambda_slack", c.lambda_slack);
  if (j.contains("slack_limit") && !j.at("slack_limit").is_null())
    c.slack_limit = j.at("slack_limit").get<double>();
  get_opt(j, "k_m", c.k_m);
  get_opt(j, "k_o", c.k_o);
  get_opt(j, "d_i", c.d_i);
  get_opt(j, "d_s", c.d_s);
  get_opt(j, "eta", c.eta);
  get_opt(j, "beta_max", c.beta_max);
  get_opt(j, "inequalities", c.inequalities);
  get_opt(j, "active_cost", c.active_cost);
  get_opt(j, "tol_t", c.tol_t);
  get_opt(j, "tol_R", c.tol_R);
  get_opt(j, "joint_limit_influence", c.joint_limit_influence);
  get_opt(j, "joint_limit_buffer", c.joint_limit_buffer);
  get_opt(j, "opacity_min", c.opacity_min);
  get_opt(j, "qp_tol", c.qp_tol);
  get_opt(j, "qp_max_iter", c.qp_max_iter);
  if (j.contains("raster")) {
    const Json& r = j.at("raster");
    get_opt(r, "resolution", c.raster.resolution);
    get_opt(r, "alpha_min", c.raster.alpha_min);
    get_opt(r, "near", c.raster.near);
    get_opt(r, "opaque_background", c.raster.opaque_background);
    if (r.contains("mode")) {
      const std::string mode = r.at("mode").get<std::string>();
      if (mode == "falloff") c.raster.mode = OpacityMode::kFalloff;
      else if (mode == "raw") c.raster.mode = OpacityMode::kRaw;
      else throw FormatError("unknown raster mode '" + mode + "'");
    }
  }
  c.validate();
  return c;
}

Json controller_to_json(const ControllerConfig& c) {
  Json j;
  j["k_e"] = c.k_e;
  j["linear_cap"] = c.linear_cap;
  j["angular_cap"] = c.angular_cap;
  j["lambda_base"] = c.lambda_base;
  j["lambda_arm"] = c.lambda_arm;
  j["lambda_slack"] = c.lambda_slack;
  j["slack_limit"] = std::isfinite(c.slack_limit) ? Json(c.slack_limit) : Json(nullptr);
  j["k_m"] = c.k_m;
  j["k_o"] = c.k_o;
  j["d_i"] = c.d_i;
  j["d_s"] = c.d_s;
  j["eta"] = c.eta;
  j["beta_max"] = c.beta_max;
  j["inequalities"] = c.inequalities;
  j["active_cost"] = c.active_cost;
  j["tol_t"] = c.tol_t;
  j["tol_R"] = c.tol_R;
  j["joint_limit_influence"] = c.joint_limit_influence;
  j["joint_limit_buffer"] = c.joint_limit_buffer;
  j["opacity_min"] = c.opacity_min;
  j["qp_tol"] = c.qp_tol;
  j["qp_max_iter"] = c.qp_max_iter;
  j["raster"] = {{"resolution", c.raster.resolution},
                 {"alpha_min", c.raster.alpha_min},
                 {"near", c.raster.near},
                 {"opaque_background", c.raster.opaque_background},
                 {"mode", c.raster.mode == OpacityMode::kFalloff ? "falloff" : "raw"}};
  return j;
}

Json scene_to_json(const GeneratedScene& s) {
  Json j;
  j["schema"] = 1;
  j["kind"] = to_string(s.kind);
  j["id"] = s.id;
  j["seed"] = s.seed;
  Json prims = Json::array();
  for (const auto& p : s.primitives.primitives) prims.push_back(primitive_to_json(p));
  j["primitives"] = prims;
  Json targets = Json::array();
  for (const auto& t : s.primitives.targets) targets.push_back(pose_to_json(t));
  j["targets"] = targets;
  if (s.primitives.start) {
    j["start"] = {{"x", s.primitives.start->x}, {"y", s.primitives.start->y},
                  {"theta", s.primitives.start->theta}};
  }
  return j;
}

GeneratedScene scene_from_json(const Json& j) {
  GeneratedScene s;
  s.kind = scene_kind_from_string(j.value("kind", "table"));
  s.id = j.value("id", 0);
  s.seed = j.value("seed", std::uint64_t{0});
  for (const auto& p : j.at("primitives")) s.primitives.primitives.push_back(primitive_from_json(p));
  if (j.contains("targets"))
    for (const auto& t : j.at("targets")) s.primitives.targets.push_back(pose_from_json(t));
  if (j.contains("target")) s.primitives.targets.push_back(pose_from_json(j.at("target")));
  if (j.contains("start")) {
    const Json& st = j.at("start");
    s.primitives.start = RobotStart{st.at("x").get<double>(), st.at("y").get<double>(),
                                    st.at("theta").get<double>()};
  }
  s.primitives.validate();
  return s;
}

Json trial_to_json(const TrialResult& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["steps"] = r.steps;
  j["final_translation_error"] = r.final_translation_error;
  j["final_rotation_error"] = r.final_rotation_error;
  if (!r.error.empty()) j["error"] = r.error;
  Json traj = Json::array();
  for (const auto& s : r.trajectory) traj.push_back(sample_to_json(s));
  j["trajectory"] = traj;
  return j;
}

TrialResult trial_from_json(const Json& j, int n_arm) {
  TrialResult r;
  r.status = trial_status_from_string(j.at("status").get<std::string>());
  r.steps = j.at("steps").get<int>();
  r.final_translation_error = j.value("final_translation_error", 0.0);
  r.final_rotation_error = j.value("final_rotation_error", 0.0);
  r.error = j.value("error", "");
  for (const auto& s : j.at("trajectory")) {
    TrialSample t;
    t.time = s.at("t").get<double>();
    t.state = state_from_json(s.at("state"));
    if (t.state.q_arm.size() != n_arm) throw FormatError("trajectory state has the wrong arm size");
    t.ee = pose_from_json(s.at("ee"));
    t.clearance = s.at("clearance").get<double>();
    t.q_dot = vecx(s.at("q_dot"));
    t.slack_norm = s.value("slack", 0.0);
    t.inequalities = s.value("inequalities", 0);
    t.active_constraints = s.value("active", 0);
    if (s.contains("min_distance") && !s.at("min_distance").is_null())
      t.min_distance = s.at("min_distance").get<double>();
    r.trajectory.push_back(std::move(t));
  }
  return r;
}

std::string trial_log_jsonl(const TrialResult& r) {
  std::string out;
  for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
    Json j = sample_to_json(r.trajectory[k]);
    j["step"] = k;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const Json& j, const std::filesystem::path& path) {
  write_text(j.dump(2) + "\n", path);
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

std::string json_hash(const Json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RobotState start_state(const RobotConfig& robot, const PrimitiveScene& scene) {
  RobotState s;
  if (scene.start) {
    s.x = scene.start->x;
    s.y = scene.start->y;
    s.theta = scene.start->theta;
  }
  s.q_arm = robot.start_q;
  return normalized(robot.model, s);
}

}  // namespace splatreach
