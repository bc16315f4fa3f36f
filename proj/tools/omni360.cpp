// omni360: batch front-end for rendering, planning, pedestrian simulation
// and evaluation.

#include "omni360/omni360.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace omni360;

namespace {

struct PoseArgs {
  std::vector<double> position{0.0, 0.0, 0.0};
  double yaw = 0.0, pitch = 0.0, roll = 0.0;

  void add(CLI::App* cmd, const std::string& prefix = "") {
    cmd->add_option("--" + prefix + "pos", position, "Camera position x y z (m)")
        ->expected(3)
        ->capture_default_str();
    cmd->add_option("--" + prefix + "yaw", yaw, "Yaw (deg)")->capture_default_str();
    cmd->add_option("--" + prefix + "pitch", pitch, "Pitch (deg, positive looks up)")
        ->capture_default_str();
    cmd->add_option("--" + prefix + "roll", roll, "Roll (deg)")->capture_default_str();
  }
  CameraPose pose() const {
    CameraPose p;
    p.position = Vec3d(position[0], position[1], position[2]);
    p.yaw = yaw;
    p.pitch = pitch;
    p.roll = roll;
    if (!p.position.allFinite())
      throw Error(ErrorCode::InvalidArgument, "camera position must be finite");
    return p;
  }
};

nlohmann::json pose_json(const CameraPose& p) {
  return {{"position", {p.position.x(), p.position.y(), p.position.z()}},
          {"yaw", p.yaw},
          {"pitch", p.pitch},
          {"roll", p.roll}};
}

std::uint64_t resolve_seed(std::uint64_t seed) {
  if (const char* env = std::getenv("OMNI360_SEED"); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "OMNI360_SEED is not an unsigned integer");
    }
  }
  return seed;
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir);
}

void write_config_echo(const std::string& dir, const nlohmann::json& config) {
  write_text_file((fs::path(dir) / "config.json").string(), config.dump(2) + "\n");
}

KinematicLimits parse_limits(const std::string& spec) {
  KinematicLimits lim;
  double a = 0, v = 0, dt = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> a >> c1 >> v >> c2 >> dt) || c1 != ',' || c2 != ',' || !(in >> std::ws).eof())
    throw Error(ErrorCode::InvalidArgument, "kinematic set '" + spec + "' must be a_max,v_max,dt");
  if (!(a > 0) || !(v > 0) || !(dt > 0))
    throw Error(ErrorCode::InvalidArgument, "kinematic set '" + spec + "' must be positive");
  lim.a_max = a;
  lim.v_max = v;
  lim.dt = dt;
  return lim;
}

// --- render ---------------------------------------------------------------

struct RenderArgs {
  std::string scene;
  PoseArgs pose;
  int cube_res = 512;
  int erp_height = 256;
  std::string out;
  bool faces = false;
  std::string depth_mode = "guarded";
  std::string frame_id = "frame_000000";
};

void run_render(const RenderArgs& args) {
  if (args.cube_res < 2) throw Error(ErrorCode::InvalidArgument, "--cube-res must be >= 2");
  if (args.erp_height < 2) throw Error(ErrorCode::InvalidArgument, "--erp-height must be >= 2");
  if (args.depth_mode != "guarded" && args.depth_mode != "nearest")
    throw Error(ErrorCode::InvalidArgument, "--depth-mode must be guarded or nearest");
  const Scene scene = load_scene_file(args.scene);
  const CameraPose pose = args.pose.pose();
  prepare_dir(args.out);
  const fs::path out(args.out);

  write_config_echo(args.out, {{"command", "render"},
                               {"scene", args.scene},
                               {"pose", pose_json(pose)},
                               {"cube_res", args.cube_res},
                               {"erp_height", args.erp_height},
                               {"faces", args.faces},
                               {"depth_mode", args.depth_mode},
                               {"frame_id", args.frame_id}});

  const CubeFaceSet cube = render_cube(scene, pose, args.cube_res);
  const ErpFrame erp = stitch(cube, args.erp_height,
                              args.depth_mode == "nearest" ? DepthSampling::Nearest
                                                           : DepthSampling::GuardedInverseBilinear);

  SampleManifest m;
  m.frame_id = args.frame_id;
  m.pose = pose;
  m.rgb = "rgb.png";
  m.depth = "depth.pfm";
  m.semantic = "semantic.png";
  m.entity = "entity.png";
  write_png((out / m.rgb).string(), erp.rgb);
  write_depth((out / m.depth).string(), to_float(erp.depth));
  write_png((out / m.semantic).string(), erp.semantic);
  write_png((out / m.entity).string(), encode_entity_raster(erp.entity));
  write_manifest((out / "manifest.json").string(), m);

  if (args.faces) {
    const fs::path dir = out / "faces";
    prepare_dir(dir.string());
    for (CubeFace f : kAllFaces) {
      const std::string name(face_name(f));
      const FaceRasters& r = cube[f];
      write_png((dir / (name + "_rgb.png")).string(), r.rgb);
      write_depth((dir / (name + "_zdepth.pfm")).string(), to_float(r.zdepth));
      write_png((dir / (name + "_semantic.png")).string(), r.semantic);
      write_png((dir / (name + "_entity.png")).string(), encode_entity_raster(r.entity));
    }
  }
}

// --- routes ---------------------------------------------------------------

struct GenArgs {
  std::uint64_t seed = 0;
  int count = 10;
  double length_min = 50.0;
  double length_max = 150.0;
  std::vector<double> bounds{-100, 5, -100, 100, 60, 100};
  double min_leg = 5.0;

  void add(CLI::App* cmd, const std::string& prefix) {
    cmd->add_option("--" + prefix + "seed", seed, "Route generator seed")->capture_default_str();
    cmd->add_option("--" + prefix + "count", count, "Number of routes")->capture_default_str();
    cmd->add_option("--length-min", length_min, "Minimum route length (m)")->capture_default_str();
    cmd->add_option("--length-max", length_max, "Maximum route length (m)")->capture_default_str();
    cmd->add_option("--bounds", bounds, "Box xmin ymin zmin xmax ymax zmax (m)")
        ->expected(6)
        ->capture_default_str();
    cmd->add_option("--min-leg", min_leg, "Minimum leg length (m)")->capture_default_str();
  }
  RouteGenConfig config() const {
    RouteGenConfig cfg;
    cfg.seed = resolve_seed(seed);
    cfg.count = count;
    cfg.min_length = length_min;
    cfg.max_length = length_max;
    cfg.bounds = {Vec3d(bounds[0], bounds[1], bounds[2]), Vec3d(bounds[3], bounds[4], bounds[5])};
    cfg.min_leg = min_leg;
    return cfg;
  }
  nlohmann::json json() const {
    const auto cfg = config();
    return {{"seed", cfg.seed},       {"count", count},     {"length_min", length_min},
            {"length_max", length_max}, {"bounds", bounds}, {"min_leg", min_leg}};
  }
};

void run_gen_waypoints(const GenArgs& gen, const std::string& out) {
  const auto routes = gen_waypoint_routes(gen.config());
  const fs::path path(out);
  if (path.has_parent_path()) prepare_dir(path.parent_path().string());
  write_text_file(out, format_routes_json(routes));
  nlohmann::json echo = gen.json();
  echo["command"] = "gen-waypoints";
  echo["out"] = out;
  write_text_file(out + ".config.json", echo.dump(2) + "\n");
}

struct PlanArgs {
  std::string routes;
  bool generate = false;
  GenArgs gen;
  std::vector<std::string> limits{"3,16,0.5", "5,21,1"};
  std::string out;
};

void run_plan(const PlanArgs& args) {
  std::vector<KinematicLimits> sets;
  for (const auto& s : args.limits) sets.push_back(parse_limits(s));
  if (args.routes.empty() == !args.generate)
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --routes or --gen");

  nlohmann::json echo = {{"command", "plan"}, {"limits", args.limits}};
  std::vector<std::vector<Waypoint>> routes;
  if (args.generate) {
    routes = gen_waypoint_routes(args.gen.config());
    echo["gen"] = args.gen.json();
  } else {
    routes = parse_routes_json(read_text_file(args.routes));
    echo["routes"] = args.routes;
  }
  prepare_dir(args.out);
  write_config_echo(args.out, echo);

  const fs::path out(args.out);
  for (std::size_t r = 0; r < routes.size(); ++r) {
    for (std::size_t k = 0; k < sets.size(); ++k) {
      PolyTrajectory traj;
      try {
        traj = plan_route(routes[r], sets[k]);
      } catch (const Error& e) {
        throw Error(ErrorCode::Infeasible, "route " + std::to_string(r) + ": " + e.what());
      }
      char name[64];
      std::snprintf(name, sizeof name, "route_%04zu_set_%zu.csv", r, k);
      write_text_file((out / name).string(), format_trajectory_csv(sample(traj, sets[k].dt)));
    }
  }
}

// --- pedestrians ----------------------------------------------------------

struct PedArgs {
  std::uint64_t seed = 0;
  int n = 15;
  std::vector<double> area{12.0, 12.0};
  long steps = 100;
  double dt = 0.1;
  PoseArgs cam;
  int erp_height = 256;
  std::string scene;
  std::string out;
  PedestrianParams params;
};

void run_pedestrians(PedArgs args) {
  if (args.steps < 0) throw Error(ErrorCode::InvalidArgument, "--steps must be >= 0");
  if (!(args.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "--dt must be > 0");
  const std::uint64_t seed = resolve_seed(args.seed);
  const Area area{0.0, args.area[0], 0.0, args.area[1]};
  std::optional<Scene> scene;
  if (!args.scene.empty()) scene = load_scene_file(args.scene);
  const CameraPose cam = args.cam.pose();

  PedestrianWorld world(seed, args.n, area, args.params);
  prepare_dir(args.out);
  write_config_echo(args.out, {{"command", "pedestrians"},
                               {"seed", seed},
                               {"n", args.n},
                               {"area", args.area},
                               {"steps", args.steps},
                               {"dt", args.dt},
                               {"camera", pose_json(cam)},
                               {"erp_height", args.erp_height},
                               {"scene", args.scene},
                               {"walk_speed", args.params.walk_speed},
                               {"chat_radius", args.params.chat_radius},
                               {"chat_duration", args.params.chat_duration},
                               {"phone_prob_per_tick", args.params.phone_prob_per_tick},
                               {"phone_duration", args.params.phone_duration}});

  const fs::path out(args.out);
  std::string events;
  std::string frames;
  const Scene* occluders = scene ? &*scene : nullptr;
  for (const auto& e : world.spawn_events()) events += format_event(e) + "\n";
  frames += keypoint_frame_json(world, cam, args.erp_height, occluders).dump() + "\n";
  for (long s = 0; s < args.steps; ++s) {
    for (const auto& e : world.step(args.dt)) events += format_event(e) + "\n";
    frames += keypoint_frame_json(world, cam, args.erp_height, occluders).dump() + "\n";
  }
  write_text_file((out / "events.log").string(), events);
  write_text_file((out / "keypoints.jsonl").string(), frames);
}

// --- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string kind;
  std::string pred, gt;
  std::string pred_entity, gt_entity;
  std::string input;
  int n_classes = 256;
  std::string out;
};

std::map<std::string, double> eval_mpde(const std::string& path) {
  std::vector<MpdeSet> sets;
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    for (const auto& s : j.at("sets")) {
      MpdeSet m;
      m.name = s.at("name").get<std::string>();
      m.distance_error = s.at("distance_error").get<double>();
      m.angular_error = s.at("angular_error").get<double>();
      m.count = s.at("count").get<long>();
      m.is_public = s.value("public", true);
      sets.push_back(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("MPDE input: ") + e.what());
  }
  const auto all = mpde_aggregate(sets, MpdeSubset::All);
  std::map<std::string, double> report = {{"dist_err_all", all.distance_error},
                                          {"ang_err_all", all.angular_error},
                                          {"samples_all", static_cast<double>(all.count)}};
  const bool any_public =
      std::any_of(sets.begin(), sets.end(), [](const MpdeSet& s) { return s.is_public && s.count > 0; });
  if (any_public) {
    const auto pub = mpde_aggregate(sets, MpdeSubset::Public);
    report["dist_err_pub"] = pub.distance_error;
    report["ang_err_pub"] = pub.angular_error;
    report["samples_pub"] = static_cast<double>(pub.count);
  }
  return report;
}

std::map<std::string, double> eval_vln(const std::string& path) {
  std::vector<VlnEpisode> episodes;
  auto vec = [](const nlohmann::json& a) {
    if (!a.is_array() || a.size() != 3) throw Error(ErrorCode::Parse, "expected [x,y,z]");
    return Vec3d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  };
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    for (const auto& e : j.at("episodes")) {
      VlnEpisode ep;
      ep.goal = vec(e.at("goal"));
      for (const auto& p : e.at("path")) ep.path.push_back(vec(p));
      ep.shortest_length = e.at("shortest_length").get<double>();
      ep.success_radius = e.value("success_radius", 3.0);
      episodes.push_back(std::move(ep));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("VLN input: ") + e.what());
  }
  const auto m = vln_metrics(episodes);
  return {{"sr", m.sr}, {"spl", m.spl}, {"ne", m.ne}};
}

void run_eval(const EvalArgs& args) {
  std::map<std::string, double> report;
  if (args.kind == "depth") {
    if (args.pred.empty() || args.gt.empty())
      throw Error(ErrorCode::InvalidArgument, "depth eval needs --pred and --gt");
    const auto m = depth_metrics(to_double(read_depth(args.pred)), to_double(read_depth(args.gt)));
    report = {{"absrel", m.absrel}, {"rmse", m.rmse}, {"delta1", m.delta1}};
  } else if (args.kind == "seg") {
    if (args.pred.empty() || args.gt.empty())
      throw Error(ErrorCode::InvalidArgument, "seg eval needs --pred and --gt");
    report["miou"] = miou(read_png_gray(args.pred), read_png_gray(args.gt), args.n_classes);
    if (!args.pred_entity.empty() || !args.gt_entity.empty()) {
      if (args.pred_entity.empty() || args.gt_entity.empty())
        throw Error(ErrorCode::InvalidArgument, "entity AP needs --pred-entity and --gt-entity");
      std::vector<ScoredMask> preds;
      for (auto& m : entity_masks(decode_entity_raster(read_png_rgb(args.pred_entity))))
        preds.push_back({std::move(m), 1.0});
      report["entity_map"] =
          entity_ap(preds, entity_masks(decode_entity_raster(read_png_rgb(args.gt_entity))));
    }
  } else if (args.kind == "mpde") {
    if (args.input.empty()) throw Error(ErrorCode::InvalidArgument, "mpde eval needs --input");
    report = eval_mpde(args.input);
  } else if (args.kind == "vln") {
    if (args.input.empty()) throw Error(ErrorCode::InvalidArgument, "vln eval needs --input");
    report = eval_vln(args.input);
  } else {
    throw Error(ErrorCode::InvalidArgument, "eval kind must be depth, seg, mpde or vln");
  }
  const std::string text = format_report(report);
  if (args.out.empty()) {
    std::cout << text;
  } else {
    const fs::path path(args.out);
    if (path.has_parent_path()) prepare_dir(path.parent_path().string());
    write_text_file(args.out, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"omni360: panoramic data generation and evaluation toolkit"};
  app.require_subcommand(1);

  RenderArgs render;
  auto* cmd_render = app.add_subcommand("render", "Render a scene to cube faces and stitch an ERP sample");
  cmd_render->add_option("--scene", render.scene, "Scene JSON file")->required();
  render.pose.add(cmd_render);
  cmd_render->add_option("--cube-res", render.cube_res, "Cube face resolution H_c")->capture_default_str();
  cmd_render->add_option("--erp-height", render.erp_height, "ERP height H_e (width is 2 H_e)")
      ->capture_default_str();
  cmd_render->add_option("--out", render.out, "Output directory")->required();
  cmd_render->add_flag("--faces", render.faces, "Also write the 24 cube-face rasters");
  cmd_render->add_option("--depth-mode", render.depth_mode, "guarded | nearest")->capture_default_str();
  cmd_render->add_option("--frame-id", render.frame_id, "Manifest frame id")->capture_default_str();

  PlanArgs plan;
  auto* cmd_plan = app.add_subcommand("plan", "Plan minimum-snap trajectories and write CSVs");
  cmd_plan->add_option("--routes", plan.routes, "Route JSON file");
  cmd_plan->add_flag("--gen", plan.generate, "Generate routes instead of reading a file");
  plan.gen.add(cmd_plan, "gen-");
  cmd_plan->add_option("--limits", plan.limits, "Kinematic sets a_max,v_max,dt (repeatable)")
      ->capture_default_str();
  cmd_plan->add_option("--out", plan.out, "Output directory")->required();

  GenArgs gen;
  std::string gen_out;
  auto* cmd_gen = app.add_subcommand("gen-waypoints", "Generate seeded waypoint routes");
  gen.add(cmd_gen, "");
  cmd_gen->add_option("--out", gen_out, "Output route JSON file")->required();

  PedArgs ped;
  auto* cmd_ped = app.add_subcommand("pedestrians", "Simulate pedestrians and export keypoints");
  cmd_ped->add_option("--seed", ped.seed, "World seed")->capture_default_str();
  cmd_ped->add_option("--n", ped.n, "Number of agents")->capture_default_str();
  cmd_ped->add_option("--area", ped.area, "Active area width depth (m)")->expected(2)->capture_default_str();
  cmd_ped->add_option("--steps", ped.steps, "Simulation steps")->capture_default_str();
  cmd_ped->add_option("--dt", ped.dt, "Step length (s)")->capture_default_str();
  ped.cam.add(cmd_ped, "cam-");
  cmd_ped->add_option("--erp-height", ped.erp_height, "ERP height for keypoint projection")
      ->capture_default_str();
  cmd_ped->add_option("--scene", ped.scene, "Optional occluder scene JSON");
  cmd_ped->add_option("--walk-speed", ped.params.walk_speed, "m/s")->capture_default_str();
  cmd_ped->add_option("--chat-radius", ped.params.chat_radius, "m")->capture_default_str();
  cmd_ped->add_option("--chat-duration", ped.params.chat_duration, "s")->capture_default_str();
  cmd_ped->add_option("--phone-prob", ped.params.phone_prob_per_tick, "Per-tick probability")
      ->capture_default_str();
  cmd_ped->add_option("--phone-duration", ped.params.phone_duration, "s")->capture_default_str();
  cmd_ped->add_option("--out", ped.out, "Output directory")->required();

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand("eval", "Compute a metric report");
  cmd_eval->add_option("kind", eval.kind, "depth | seg | mpde | vln")->required();
  cmd_eval->add_option("--pred", eval.pred, "Predicted depth PFM / semantic PNG");
  cmd_eval->add_option("--gt", eval.gt, "Ground-truth depth PFM / semantic PNG");
  cmd_eval->add_option("--pred-entity", eval.pred_entity, "Predicted entity PNG");
  cmd_eval->add_option("--gt-entity", eval.gt_entity, "Ground-truth entity PNG");
  cmd_eval->add_option("--input", eval.input, "MPDE or VLN JSON input");
  cmd_eval->add_option("--n-classes", eval.n_classes, "Semantic classes counted by mIoU")
      ->capture_default_str();
  cmd_eval->add_option("--out", eval.out, "Report path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "omni360: error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*cmd_render) run_render(render);
    if (*cmd_plan) run_plan(plan);
    if (*cmd_gen) run_gen_waypoints(gen, gen_out);
    if (*cmd_ped) run_pedestrians(ped);
    if (*cmd_eval) run_eval(eval);
  } catch (const Error& e) {
    std::cerr << "omni360: error[" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "omni360: error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
