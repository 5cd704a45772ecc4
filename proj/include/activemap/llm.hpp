#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "activemap/draw.hpp"
#include "activemap/image.hpp"
#include "activemap/lie2.hpp"
#include "activemap/render.hpp"

namespace activemap {

// Long-horizon goal selection: the exploration map is rendered top-down,
// annotated, and sent to a multimodal chat model that answers with a JSON
// target choice. Placeholders <TOTAL_STEPS>, <STEP_ID>, <NUM_FRAME> and
// <NUM_FRAME - 1> are substituted at build time.
inline constexpr const char* kSystemPromptTemplate =
    R"PROMPT(You are an AI assistant that can analyze images and plan a long-term goal for the exploration task of a ground robot.
You will be given a bird-eye view image of a scene.
The goal is to plan a long-term exploration mission for a robot to traverse the area.
The robot's task is to explore the terrain efficiently, identifying important areas, potential obstacles, and unvisited areas.
Please analyze the image and select a long-term goal from the candidates for the robot to explore the area.
Empty space doesn't always mean they are unvisited regions, sometimes it's just outside the floor plan of this scene.
We are allowed to explore a total of <TOTAL_STEPS> steps and this is step <STEP_ID>.
Therefore, it's better to select a space that is close to the visited regions but still unvisited and not behind the walls.
The current location of the robot is marked with the blue star(*) marker.
The last frontier you selected is marked with a yellow diamond shape.
The visited path is painted as green lines in the image.
Note that you don't have to select the closest point to the robot, but the point that is most likely to be unvisited and important to explore.
As you can see, there are <NUM_FRAME> candidate points to select from.
They are numbered from 0 to <NUM_FRAME - 1> in red color.
If you find all the goals are not necessary to explore and we should instead focus on improving existing reconstruction, please give -1 in the `target` entry of the JSON.
Please provide a detailed exploration plan and select an exploration target with reasons in the JSON format as shown below.


```
{
"target": 2, "reason": "The target is located at an unvisited region of the image and seems to be an unvisited bedroom"
}
```
Do not cut off the JSON and generate the full JSON.)PROMPT";

inline constexpr const char* kUserPrompt =
    "I have a bird-eye view image of a scene. The goal is to plan a long-term exploration "
    "mission for a robot to traverse the area. Please analyze the attached image and provide "
    "the exploration plan first and then an exploration target in the specified JSON format.";

namespace detail {

inline void replace_all(std::string& s, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

inline std::string base64_encode(const std::vector<std::uint8_t>& data) {
  static constexpr char tbl[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 2 < data.size(); i += 3) {
    const unsigned v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out.push_back(tbl[(v >> 6) & 63]);
    out.push_back(tbl[v & 63]);
  }
  if (i + 1 == data.size()) {
    const unsigned v = data[i] << 16;
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == data.size()) {
    const unsigned v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out.push_back(tbl[(v >> 6) & 63]);
    out += "=";
  }
  return out;
}

}  // namespace detail

struct PlanningContext {
  Image birdseye;  // already annotated
  int total_steps = 0;
  int current_step = 0;
  int frontier_count = 0;
};

struct BuiltPrompt {
  std::string system_text;
  std::string user_text;
  std::vector<std::uint8_t> image_png;
};

inline BuiltPrompt build_prompt(const PlanningContext& ctx) {
  if (ctx.frontier_count <= 0) {
    throw std::invalid_argument("build_prompt: no frontier candidates");
  }
  BuiltPrompt out;
  out.system_text = kSystemPromptTemplate;
  detail::replace_all(out.system_text, "<NUM_FRAME - 1>", std::to_string(ctx.frontier_count - 1));
  detail::replace_all(out.system_text, "<NUM_FRAME>", std::to_string(ctx.frontier_count));
  detail::replace_all(out.system_text, "<TOTAL_STEPS>", std::to_string(ctx.total_steps));
  detail::replace_all(out.system_text, "<STEP_ID>", std::to_string(ctx.current_step));
  out.user_text = kUserPrompt;
  out.image_png = encode_png(ctx.birdseye);
  return out;
}

enum class DecisionSource { Llm, Fixture, Fallback };

inline const char* decision_source_name(DecisionSource s) {
  switch (s) {
    case DecisionSource::Llm:
      return "llm";
    case DecisionSource::Fixture:
      return "fixture";
    case DecisionSource::Fallback:
      return "fallback";
  }
  return "fallback";
}

struct LlmDecision {
  int target = -1;  // -1 requests refinement of existing reconstruction
  std::string reason;
  std::string raw_response;
  DecisionSource source = DecisionSource::Fallback;
};

struct LlmClientConfig {
  std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model = "gpt-4o";
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_s = 30.0;
  std::string fixture_path;  // nonempty switches to recorded responses
  int max_retries = 2;
};

struct QueryResult {
  bool ok = false;
  std::string text;
  DecisionSource source = DecisionSource::Fallback;
  std::string error;
};

// Recorded responses: JSON array of {"round": int, "response_text": str}.
inline std::map<int, std::string> load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_fixture: cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (!j.is_array()) throw std::runtime_error("load_fixture: expected a JSON array");
  std::map<int, std::string> out;
  for (const auto& e : j) {
    out[e.at("round").get<int>()] = e.at("response_text").get<std::string>();
  }
  return out;
}

namespace detail {

inline std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  // scheme://host[:port]/path -> (scheme://host[:port], /path)
  const size_t scheme = url.find("://");
  const size_t path = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path == std::string::npos) return {url, "/"};
  return {url.substr(0, path), url.substr(path)};
}

}  // namespace detail

// One chat-completion request with the image attached as a base64 PNG
// part. Network or protocol failures are reported, never thrown: the
// caller falls back deterministically.
inline QueryResult query_llm(const BuiltPrompt& prompt, const LlmClientConfig& cfg,
                             int planning_round) {
  QueryResult out;
  if (!cfg.fixture_path.empty()) {
    try {
      const auto fixture = load_fixture(cfg.fixture_path);
      const auto it = fixture.find(planning_round);
      if (it == fixture.end()) {
        out.error = "fixture has no response for round " + std::to_string(planning_round);
        return out;
      }
      out.ok = true;
      out.text = it->second;
      out.source = DecisionSource::Fixture;
      return out;
    } catch (const std::exception& e) {
      out.error = e.what();
      return out;
    }
  }
  if (cfg.endpoint.empty()) {
    out.error = "no endpoint configured";
    return out;
  }

  nlohmann::json body = {
      {"model", cfg.model},
      {"messages",
       {{{"role", "system"}, {"content", prompt.system_text}},
        {{"role", "user"},
         {"content",
          {{{"type", "text"}, {"text", prompt.user_text}},
           {{"type", "image_url"},
            {"image_url",
             {{"url",
               "data:image/png;base64," + detail::base64_encode(prompt.image_png)}}}}}}}}}};
  const std::string payload = body.dump();

  const auto [base, path] = detail::split_endpoint(cfg.endpoint);
  httplib::Headers headers;
  if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    try {
      httplib::Client cli(base);
      cli.set_connection_timeout(static_cast<time_t>(cfg.timeout_s),
                                 static_cast<time_t>(cfg.timeout_s * 1e6) % 1000000);
      cli.set_read_timeout(static_cast<time_t>(cfg.timeout_s), 0);
      auto res = cli.Post(path, headers, payload, "application/json");
      if (!res) {
        out.error = "request failed: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        out.error = "http status " + std::to_string(res->status);
        continue;
      }
      const nlohmann::json reply = nlohmann::json::parse(res->body);
      out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      out.ok = true;
      out.source = DecisionSource::Llm;
      return out;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  }
  return out;
}

namespace detail {

// Balanced {...} spans of `s`, string- and escape-aware. Every opening
// brace starts its own candidate span, so stray unbalanced braces earlier
// in the text cannot hide a later well-formed object. Spans are ordered by
// starting position.
inline std::vector<std::string> json_object_spans(const std::string& s) {
  std::vector<std::string> spans;
  for (size_t start = 0; start < s.size(); ++start) {
    if (s[start] != '{') continue;
    int depth = 0;
    bool in_string = false, escaped = false;
    for (size_t i = start; i < s.size(); ++i) {
      const char c = s[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          spans.push_back(s.substr(start, i - start + 1));
          break;
        }
      }
    }
  }
  return spans;
}

}  // namespace detail

// Extracts the decision from free-form model output: the last well-formed
// JSON object carrying an integer "target" wins; anything else (missing,
// malformed, fractional, out of range) falls back to the largest frontier,
// which is index 0 of the size-sorted frontier list, or -1 when there are
// no frontiers at all.
inline LlmDecision parse_decision(const std::string& raw, int frontier_count,
                                  DecisionSource source_on_success = DecisionSource::Llm) {
  LlmDecision out;
  out.raw_response = raw;
  out.source = DecisionSource::Fallback;
  out.target = frontier_count > 0 ? 0 : -1;

  std::optional<nlohmann::json> found;
  for (const std::string& span : detail::json_object_spans(raw)) {
    try {
      nlohmann::json j = nlohmann::json::parse(span);
      if (j.is_object() && j.contains("target") && j["target"].is_number_integer()) {
        found = std::move(j);
      }
    } catch (const std::exception&) {
      // not valid JSON, keep scanning
    }
  }
  if (!found) return out;
  const long long target = (*found)["target"].get<long long>();
  if (target < -1 || target >= frontier_count) return out;
  out.target = static_cast<int>(target);
  out.source = source_on_success;
  if (found->contains("reason") && (*found)["reason"].is_string()) {
    out.reason = (*found)["reason"].get<std::string>();
  }
  return out;
}

// Integer pixel of a world point in a top-down frame.
inline Eigen::Vector2i annotation_pixel(const BirdseyeFrame& frame, const Eigen::Vector2d& w) {
  const Eigen::Vector2d p = frame.to_px(w);
  return {static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y()))};
}

// Draws the planning annotations over a top-down render: the visited
// trajectory as green lines, the previously selected goal as a yellow
// diamond, the robot as a blue star, and the candidate frontiers as red
// indices 0..n-1 in list order.
inline Image annotate_birdseye(Image img, const BirdseyeFrame& frame, const Pose2& robot,
                               const std::vector<Eigen::Vector2d>& trajectory,
                               const std::optional<Eigen::Vector2d>& last_goal,
                               const std::vector<Eigen::Vector2d>& frontier_centroids) {
  const Eigen::Vector3d blue(0.0, 0.0, 1.0), green(0.0, 0.8, 0.0), yellow(1.0, 1.0, 0.0),
      red(1.0, 0.0, 0.0);
  for (size_t i = 0; i + 1 < trajectory.size(); ++i) {
    const Eigen::Vector2i a = annotation_pixel(frame, trajectory[i]);
    const Eigen::Vector2i b = annotation_pixel(frame, trajectory[i + 1]);
    draw_line(img, a.x(), a.y(), b.x(), b.y(), green);
  }
  if (last_goal) {
    const Eigen::Vector2i g = annotation_pixel(frame, *last_goal);
    draw_diamond(img, g.x(), g.y(), yellow, 3);
  }
  const Eigen::Vector2i r = annotation_pixel(frame, robot.translation());
  draw_star(img, r.x(), r.y(), blue, 4);
  for (size_t i = 0; i < frontier_centroids.size(); ++i) {
    const Eigen::Vector2i c = annotation_pixel(frame, frontier_centroids[i]);
    draw_number(img, c.x(), c.y(), static_cast<int>(i), red);
  }
  return img;
}

}  // namespace activemap
