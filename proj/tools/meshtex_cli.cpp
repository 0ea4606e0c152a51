// meshtex command-line front end: edges, texture, preview, invert, serve-mock.
//
// Exit codes: 0 success, 2 usage error, 3 I/O error, 4 generator/backend error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "meshtex/meshtex.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kIo = 3, kBackend = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

meshtex::TriMesh load_normalized(const std::string& path) {
    if (!fs::exists(path)) throw meshtex::IoError("mesh not found: " + path);
    return meshtex::normalize_mesh(meshtex::load_mesh(path));
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw meshtex::IoError("cannot read " + path);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw UsageError(path + ": config must be a JSON object");
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw meshtex::IoError("cannot write " + path.string());
    out << text;
    if (!out) throw meshtex::IoError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw meshtex::IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Canny knobs shared by `edges` and `texture`.
struct CannyFlags {
    std::optional<double> sigma, low, high;

    void add(CLI::App* cmd) {
        cmd->add_option("--canny-sigma", sigma, "Gaussian sigma of the Canny blur (default 1.4)");
        cmd->add_option("--canny-low", low, "Canny low hysteresis threshold, 8-bit gradient scale (default 100)");
        cmd->add_option("--canny-high", high, "Canny high hysteresis threshold (default 200)");
    }
    void apply(meshtex::CannyParams& p) const {
        if (sigma) p.sigma = *sigma;
        if (low) p.low = *low;
        if (high) p.high = *high;
    }
};

meshtex::EdgeSources sources_or_usage(const std::string& text) {
    try {
        return meshtex::parse_edge_sources(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// ---------------------------------------------------------------- edges

struct EdgesArgs {
    std::string mesh, out = ".", sources = "cc,depth,normal";
    double az = 0.0, el = 0.0, radius = meshtex::kScheduleRadius, fov = meshtex::kScheduleFov;
    int size = 512, cc_iters = 5;
    std::int64_t seed = 0;
    CannyFlags canny;
};

int run_edges(const EdgesArgs& a) {
    meshtex::EdgeSettings settings;
    settings.sources = sources_or_usage(a.sources);
    settings.cc_iters = a.cc_iters;
    settings.seed = static_cast<std::uint64_t>(a.seed);
    a.canny.apply(settings.canny);
    meshtex::ViewSpec view{a.az, a.el, a.radius, a.fov, a.size, a.size};
    try {
        settings.canny.validate();
        view.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (settings.cc_iters < 1) throw UsageError("--cc-iters must be >= 1");

    const auto mesh = load_normalized(a.mesh);
    const auto g = meshtex::rasterize(mesh, view);
    const auto set = meshtex::extract_edges(g, meshtex::connected_components(mesh), settings);
    const fs::path out(a.out);
    ensure_dir(out);
    if (set.cc) meshtex::write_png((out / "edges_cc.png").string(), *set.cc);
    if (set.depth) meshtex::write_png((out / "edges_depth.png").string(), *set.depth);
    if (set.normal) meshtex::write_png((out / "edges_normal.png").string(), *set.normal);
    meshtex::write_png((out / "edges_union.png").string(), set.composed);
    std::cout << "wrote edge maps (" << meshtex::to_string(settings.sources) << ") to " << out.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- texture

struct TextureArgs {
    std::optional<std::string> config, mesh, reference, backend, endpoint, out, lambda_ip, sources, prompt,
        negative_prompt, concept_id;
    std::optional<int> views, atlas_size, view_size, cc_iters;
    std::optional<double> lambda_cn, refine_margin, cos_floor, timeout;
    std::optional<std::int64_t> seed;
    bool timings = false;
    CannyFlags canny;
};

// Everything cmd_texture needs after merging config file and flags.
struct RunConfig {
    meshtex::TexturingConfig tex;
    std::string mesh, reference, backend = "mock", endpoint, out = "out";
    std::vector<std::string> lambda_tokens{"1.0"};
    double timeout = meshtex::kDefaultTimeoutSeconds;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
}

double parse_lambda(const std::string& tok) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw UsageError("--lambda-ip: not a number: '" + tok + "'");
    }
}

template <typename T>
void take(const Json& j, const char* key, T& dst) {
    if (const auto it = j.find(key); it != j.end() && !it->is_null()) {
        try {
            dst = it->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw UsageError(std::string("config field '") + key + "' has the wrong type");
        }
    }
}

RunConfig resolve_run_config(const TextureArgs& a) {
    RunConfig rc;
    auto& t = rc.tex;
    if (a.config) {
        const Json j = read_json_file(*a.config);
        take(j, "mesh", rc.mesh);
        take(j, "reference", rc.reference);
        take(j, "backend", rc.backend);
        take(j, "endpoint", rc.endpoint);
        take(j, "out", rc.out);
        take(j, "timeout", rc.timeout);
        take(j, "n_views", t.n_views);
        take(j, "atlas_size", t.atlas_size);
        take(j, "view_size", t.view_size);
        if (const auto it = j.find("lambda_ip"); it != j.end() && !it->is_null()) {
            rc.lambda_tokens.clear();
            if (it->is_array()) {
                for (const auto& v : *it) rc.lambda_tokens.push_back(v.is_string() ? v.get<std::string>() : v.dump());
            } else {
                rc.lambda_tokens.push_back(it->is_string() ? it->get<std::string>() : it->dump());
            }
        }
        take(j, "lambda_cn", t.lambda_cn);
        take(j, "seed", t.seed);
        std::string sources;
        take(j, "sources", sources);
        if (!sources.empty()) t.sources = sources_or_usage(sources);
        take(j, "cc_iters", t.cc_iters);
        take(j, "canny_sigma", t.canny.sigma);
        take(j, "canny_low", t.canny.low);
        take(j, "canny_high", t.canny.high);
        take(j, "prompt", t.prompt);
        take(j, "negative_prompt", t.negative_prompt);
        std::string concept_str;
        take(j, "concept_id", concept_str);
        if (!concept_str.empty()) t.concept_id = concept_str;
        take(j, "refine_margin", t.refine_margin);
        take(j, "cos_floor", t.cos_floor);
        take(j, "record_timings", t.record_timings);
    }
    if (a.mesh) rc.mesh = *a.mesh;
    if (a.reference) rc.reference = *a.reference;
    if (a.backend) rc.backend = *a.backend;
    if (a.endpoint) rc.endpoint = *a.endpoint;
    if (a.out) rc.out = *a.out;
    if (a.timeout) rc.timeout = *a.timeout;
    if (a.views) t.n_views = *a.views;
    if (a.atlas_size) t.atlas_size = *a.atlas_size;
    if (a.view_size) t.view_size = *a.view_size;
    if (a.lambda_ip) rc.lambda_tokens = split_commas(*a.lambda_ip);
    if (a.lambda_cn) t.lambda_cn = *a.lambda_cn;
    if (a.seed) t.seed = *a.seed;
    if (a.sources) t.sources = sources_or_usage(*a.sources);
    if (a.cc_iters) t.cc_iters = *a.cc_iters;
    a.canny.apply(t.canny);
    if (a.prompt) t.prompt = *a.prompt;
    if (a.negative_prompt) t.negative_prompt = *a.negative_prompt;
    if (a.concept_id) t.concept_id = *a.concept_id;
    if (a.refine_margin) t.refine_margin = *a.refine_margin;
    if (a.cos_floor) t.cos_floor = *a.cos_floor;
    if (a.timings) t.record_timings = true;

    if (rc.mesh.empty()) throw UsageError("no mesh given (--mesh or config 'mesh')");
    if (rc.reference.empty()) throw UsageError("no reference image given (--reference or config 'reference')");
    if (rc.backend != "mock" && rc.backend != "remote") throw UsageError("--backend must be mock or remote");
    if (rc.backend == "remote" && rc.endpoint.empty()) throw UsageError("remote backend needs --endpoint");
    if (rc.lambda_tokens.empty()) throw UsageError("--lambda-ip needs at least one value");
    if (!(rc.timeout > 0.0)) throw UsageError("timeout must be positive");
    for (const auto& tok : rc.lambda_tokens) {
        auto probe = t;
        probe.lambda_ip = parse_lambda(tok);
        try {
            probe.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    return rc;
}

int run_texture(const TextureArgs& a) {
    const RunConfig rc = resolve_run_config(a);
    const auto mesh = load_normalized(rc.mesh);
    if (!fs::exists(rc.reference)) throw meshtex::IoError("reference image not found: " + rc.reference);
    const auto reference = meshtex::read_png<meshtex::RgbImage>(rc.reference);

    std::unique_ptr<meshtex::Generator> generator;
    if (rc.backend == "remote") generator = std::make_unique<meshtex::RemoteGenerator>(rc.endpoint, rc.timeout);
    else generator = std::make_unique<meshtex::MockGenerator>();

    const bool sweep = rc.lambda_tokens.size() > 1;
    for (const auto& tok : rc.lambda_tokens) {
        meshtex::TexturingConfig cfg = rc.tex;
        cfg.lambda_ip = parse_lambda(tok);
        const fs::path dir = sweep ? fs::path(rc.out) / ("lambda_ip_" + tok) : fs::path(rc.out);
        ensure_dir(dir);
        meshtex::TexturingResult result;
        try {
            result = meshtex::texture_mesh(mesh, *generator, cfg, reference);
        } catch (const meshtex::GeneratorError& e) {
            // Flag the incomplete output set so sweeps can be resumed by hand.
            write_text(dir / "FAILED.txt", std::string(e.what()) + "\n");
            throw;
        }
        meshtex::export_textured_mesh(result.mesh, result.atlas, dir, "mesh");
        Json report = meshtex::report_to_json(result);
        report["config"] = Json{{"lambda_ip", cfg.lambda_ip},
                                {"lambda_cn", cfg.lambda_cn},
                                {"seed", cfg.seed},
                                {"n_views", cfg.n_views},
                                {"atlas_size", cfg.atlas_size},
                                {"view_size", cfg.view_size},
                                {"sources", meshtex::to_string(cfg.sources)},
                                {"backend", rc.backend}};
        write_text(dir / "report.json", report.dump(2) + "\n");
        std::cout << "lambda_ip=" << tok << ": " << dir.string() << " (" << report["totals"]["texels_seen"].get<std::size_t>()
                  << " texels seen)\n";
    }
    return kOk;
}

// ---------------------------------------------------------------- preview

struct PreviewArgs {
    std::string mesh, atlas, out = "frames";
    int frames = 24, size = 512;
    double el = meshtex::kBaseElevation;
};

int run_preview(const PreviewArgs& a) {
    if (a.frames < 1) throw UsageError("--frames must be >= 1");
    if (a.size < 1) throw UsageError("--size must be >= 1");
    const auto mesh = load_normalized(a.mesh);
    if (!mesh.has_uvs()) throw UsageError("mesh has no UVs; preview needs a textured mesh");
    if (!fs::exists(a.atlas)) throw meshtex::IoError("atlas not found: " + a.atlas);
    const auto atlas = meshtex::TextureAtlas::from_image(meshtex::read_png<meshtex::RgbImage>(a.atlas));
    const fs::path out(a.out);
    ensure_dir(out);
    for (int i = 0; i < a.frames; ++i) {
        const meshtex::ViewSpec view{360.0 * i / a.frames, a.el, meshtex::kScheduleRadius, meshtex::kScheduleFov, a.size, a.size};
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03d.png", i);
        meshtex::write_png((out / name).string(), meshtex::render_textured(mesh, atlas, view));
    }
    std::cout << "wrote " << a.frames << " frames to " << out.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- invert

struct InvertArgs {
    std::optional<std::string> endpoint, config;
    std::string reference;
    int steps = 100;
    std::int64_t seed = 0;
    double timeout = meshtex::kDefaultTimeoutSeconds;
};

int run_invert(const InvertArgs& a) {
    if (a.steps < 1) throw UsageError("--steps must be >= 1");
    Json cfg = Json::object();
    if (a.config && fs::exists(*a.config)) cfg = read_json_file(*a.config);
    std::string endpoint = a.endpoint.value_or("");
    if (endpoint.empty()) take(cfg, "endpoint", endpoint);
    if (endpoint.empty()) throw UsageError("no endpoint given (--endpoint or config 'endpoint')");
    if (!fs::exists(a.reference)) throw meshtex::IoError("reference image not found: " + a.reference);
    const auto ref = meshtex::read_png<meshtex::RgbImage>(a.reference);
    const std::string concept_str = meshtex::remote_invert(endpoint, ref, a.steps, a.seed, a.timeout);
    if (a.config) {
        cfg["concept_id"] = concept_str;
        write_text(*a.config, cfg.dump(2) + "\n");
    }
    std::cout << concept_str << "\n";
    return kOk;
}

// ---------------------------------------------------------------- serve-mock

int run_serve(const std::string& host, int port) {
    httplib::Server server;
    meshtex::install_procedural_service(server);
    std::cout << "serving procedural generator on http://" << host << ":" << port << std::endl;
    if (!server.listen(host, port)) throw meshtex::IoError("cannot listen on " + host + ":" + std::to_string(port));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meshtex: edge-conditioned multi-view mesh texturing"};
    app.require_subcommand(1);

    EdgesArgs ea;
    auto* edges = app.add_subcommand("edges", "Render one view and write its edge maps");
    edges->add_option("--mesh", ea.mesh, "Input OBJ mesh")->required();
    edges->add_option("--az", ea.az, "Camera azimuth in degrees")->capture_default_str();
    edges->add_option("--el", ea.el, "Camera elevation in degrees")->capture_default_str();
    edges->add_option("--radius", ea.radius, "Camera distance from the origin")->capture_default_str();
    edges->add_option("--fov", ea.fov, "Vertical field of view in degrees")->capture_default_str();
    edges->add_option("--size", ea.size, "View width and height in pixels")->capture_default_str();
    edges->add_option("--sources", ea.sources, "Comma list of edge sources: cc, depth, normal")->capture_default_str();
    edges->add_option("--cc-iters", ea.cc_iters, "Random CC colorings to union")->capture_default_str();
    edges->add_option("--seed", ea.seed, "Seed for the CC colorings")->capture_default_str();
    edges->add_option("--out", ea.out, "Output directory")->capture_default_str();
    ea.canny.add(edges);

    TextureArgs ta;
    auto* texture = app.add_subcommand("texture", "Texture a mesh and export atlas, OBJ/MTL and a JSON report");
    texture->add_option("--config", ta.config, "JSON run config; flags override its values");
    texture->add_option("--mesh", ta.mesh, "Input OBJ mesh");
    texture->add_option("--reference", ta.reference, "Reference image (PNG)");
    texture->add_option("--backend", ta.backend, "Generator backend: mock or remote (default mock)");
    texture->add_option("--endpoint", ta.endpoint, "Generator service URL (remote backend)");
    texture->add_option("--timeout", ta.timeout, "Per-request timeout in seconds for the remote backend (default 600)");
    texture->add_option("--out", ta.out, "Output directory (default out)");
    texture->add_option("--views", ta.views, "Number of scheduled views (default 8)");
    texture->add_option("--atlas-size", ta.atlas_size, "Atlas width and height (default 1024)");
    texture->add_option("--view-size", ta.view_size, "View width and height (default 512)");
    texture->add_option("--lambda-ip", ta.lambda_ip,
                        "Image-prompt weight; a comma list runs a sweep into lambda_ip_<value> subdirectories (default 1.0)");
    texture->add_option("--lambda-cn", ta.lambda_cn, "Structural conditioning weight (default 1.0)");
    texture->add_option("--seed", ta.seed, "Base seed; view i uses seed + i (default 0)");
    texture->add_option("--sources", ta.sources, "Comma list of edge sources: cc, depth, normal (default all)");
    texture->add_option("--cc-iters", ta.cc_iters, "Random CC colorings to union (default 5)");
    texture->add_option("--prompt", ta.prompt, "Text prompt");
    texture->add_option("--negative-prompt", ta.negative_prompt, "Negative text prompt");
    texture->add_option("--concept-id", ta.concept_id, "Concept id from a previous `invert` run");
    texture->add_option("--refine-margin", ta.refine_margin, "cos_view gain needed to overwrite a texel (default 0.2)");
    texture->add_option("--cos-floor", ta.cos_floor, "Minimum cos_view for a texel write (default 0.2)");
    texture->add_flag("--timings", ta.timings, "Record wall-clock generation time per view in the report");
    ta.canny.add(texture);

    PreviewArgs pa;
    auto* preview = app.add_subcommand("preview", "Render turntable frames of a textured mesh");
    preview->add_option("--mesh", pa.mesh, "Textured OBJ mesh")->required();
    preview->add_option("--atlas", pa.atlas, "Atlas PNG")->required();
    preview->add_option("--frames", pa.frames, "Number of frames, evenly spaced in azimuth")->capture_default_str();
    preview->add_option("--el", pa.el, "Camera elevation in degrees")->capture_default_str();
    preview->add_option("--size", pa.size, "Frame width and height")->capture_default_str();
    preview->add_option("--out", pa.out, "Output directory")->capture_default_str();

    InvertArgs ia;
    auto* invert = app.add_subcommand("invert", "Run Image Inversion on the service and store the concept id");
    invert->add_option("--endpoint", ia.endpoint, "Generator service URL (falls back to config 'endpoint')");
    invert->add_option("--reference", ia.reference, "Reference image (PNG)")->required();
    invert->add_option("--steps", ia.steps, "Fine-tuning iterations")->capture_default_str();
    invert->add_option("--seed", ia.seed, "Training seed")->capture_default_str();
    invert->add_option("--timeout", ia.timeout, "Request timeout in seconds")->capture_default_str();
    invert->add_option("--config", ia.config, "Run config file that receives the concept_id field");

    std::string host = "127.0.0.1";
    int port = 8765;
    auto* serve = app.add_subcommand("serve-mock", "Serve the procedural generator over HTTP");
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Port")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*edges) return run_edges(ea);
        if (*texture) return run_texture(ta);
        if (*preview) return run_preview(pa);
        if (*invert) return run_invert(ia);
        if (*serve) return run_serve(host, port);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const meshtex::GeneratorError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == meshtex::GeneratorError::Kind::invalid_request ? kUsage : kBackend;
    } catch (const meshtex::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const meshtex::MeshError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    return kUsage;
}
