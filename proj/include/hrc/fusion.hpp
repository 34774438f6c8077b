#pragma once

#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hrc/types.hpp"

namespace hrc::fusion {

enum class Source { voice, gesture };
enum class Area { left, right };
enum class PointAtArea { left, right, ambiguous };
enum class CommandKind { instruction, error, response };

inline const char* to_string(Source s) { return s == Source::voice ? "voice" : "gesture"; }
inline const char* to_string(Area a) { return a == Area::left ? "left" : "right"; }
inline const char* to_string(CommandKind k) {
  switch (k) {
    case CommandKind::instruction: return "instruction";
    case CommandKind::error: return "error";
    case CommandKind::response: return "response";
  }
  return "?";
}

inline std::optional<Area> parse_area(const std::string& s) {
  if (s == "left") return Area::left;
  if (s == "right") return Area::right;
  return std::nullopt;
}

struct VoicePayload {
  std::string utterance;
  std::string intent;  // "fetch", "query", or "" when recognition failed
  std::map<std::string, std::string> slots;
};

struct GesturePayload {
  std::string label;  // "point_at", "start", "stop", "confirm"
  double confidence = 1.0;
  std::map<std::string, Vec3> keypoints;  // named, world frame
};

struct ChannelEvent {
  Source source = Source::voice;
  double timestamp = 0.0;
  std::optional<VoicePayload> voice;
  std::optional<GesturePayload> gesture;

  static ChannelEvent make_voice(double t, VoicePayload v) {
    ChannelEvent e;
    e.source = Source::voice;
    e.timestamp = t;
    e.voice = std::move(v);
    return e;
  }
  static ChannelEvent make_gesture(double t, GesturePayload g) {
    ChannelEvent e;
    e.source = Source::gesture;
    e.timestamp = t;
    e.gesture = std::move(g);
    return e;
  }

  void validate() const {
    require(std::isfinite(timestamp), "channel event: timestamp must be finite");
    require(voice.has_value() != gesture.has_value(),
            "channel event: exactly one payload must be set");
    require(voice.has_value() == (source == Source::voice),
            "channel event: payload kind must match source");
    if (gesture)
      require(gesture->confidence >= 0.0 && gesture->confidence <= 1.0,
              "channel event: confidence must be in [0,1]");
  }
};

/// Accumulation window. Events live in [opened_at, opened_at + recognition_time);
/// an event landing exactly on the boundary belongs to the next window.
struct FusionWindow {
  double opened_at = 0.0;
  double recognition_time = 2.0;
  std::vector<ChannelEvent> events;

  double end() const { return opened_at + recognition_time; }
};

// ---------------------------------------------------------------------------
// Raw functions

struct PointAtResult {
  Vec3 direction = Vec3::UnitX();  // unit, oriented shoulder -> wrist
  PointAtArea area = PointAtArea::ambiguous;
  double fit_residual = 0.0;  // RMS point-to-line distance [m]
};

/// Pointing direction as the principal axis of the shoulder/elbow/wrist
/// scatter, oriented from shoulder toward wrist. The lateral component in
/// the workspace frame picks the area; within the threshold band the area
/// stays ambiguous.
inline PointAtResult point_at(const Vec3& shoulder, const Vec3& elbow, const Vec3& wrist,
                              const Vec3& lateral_axis = Vec3::UnitY(),
                              double lat_threshold = 0.05) {
  require(shoulder.allFinite() && elbow.allFinite() && wrist.allFinite(),
          "point_at: keypoints must be finite");
  require((shoulder - elbow).norm() > 1e-12 && (elbow - wrist).norm() > 1e-12 &&
              (shoulder - wrist).norm() > 1e-12,
          "point_at: coincident keypoints");

  const Vec3 mean = (shoulder + elbow + wrist) / 3.0;
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const Vec3& p : {shoulder, elbow, wrist}) {
    const Vec3 c = p - mean;
    scatter += c * c.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  Vec3 dir = eig.eigenvectors().col(2);  // largest eigenvalue
  if (dir.dot(wrist - shoulder) < 0.0) dir = -dir;

  PointAtResult r;
  r.direction = dir.normalized();

  double sq = 0.0;
  for (const Vec3& p : {shoulder, elbow, wrist}) {
    const Vec3 c = p - mean;
    sq += (c - c.dot(r.direction) * r.direction).squaredNorm();
  }
  r.fit_residual = std::sqrt(sq / 3.0);

  const double lat = r.direction.dot(lateral_axis.normalized());
  if (lat < -lat_threshold) r.area = PointAtArea::right;
  else if (lat > lat_threshold) r.area = PointAtArea::left;
  else r.area = PointAtArea::ambiguous;
  return r;
}

struct RawResults {
  std::optional<PointAtResult> point_at;  // most recent Point-At of the window
};

// ---------------------------------------------------------------------------
// Window encoding

inline int intent_id(const std::string& intent) {
  if (intent == "fetch") return 1;
  if (intent == "query") return 2;
  return 0;
}

inline int gesture_id(const std::string& label) {
  if (label == "point_at") return 1;
  if (label == "start") return 2;
  if (label == "stop") return 3;
  if (label == "confirm") return 4;
  return 0;
}

inline std::string format_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct EncodedEvent {
  Source source;
  double rel_time = 0.0;  // seconds from window open
  int label_id = 0;
  std::string label;
  std::string summary;  // canonical slot / keypoint digest
  std::map<std::string, std::string> slots;  // voice slots, for the classifier
};

struct EncodedWindow {
  double opened_at = 0.0;
  double closed_at = 0.0;
  std::vector<EncodedEvent> events;

  std::string to_string() const {
    std::string out = "window " + format_num(opened_at) + ".." + format_num(closed_at) + "\n";
    for (const auto& e : events) {
      out += fusion::to_string(e.source);
      out += " +" + format_num(e.rel_time) + " #" + std::to_string(e.label_id);
      out += " " + e.label + " {" + e.summary + "}\n";
    }
    return out;
  }
};

/// Deterministic feature sequence of a finalized window. Events are already
/// ordered by (timestamp, source) with voice before gesture on ties, so the
/// encoding is identical no matter the arrival permutation.
inline EncodedWindow encode_window(const FusionWindow& w) {
  require(!w.events.empty(), "encode_window: empty window");
  EncodedWindow enc;
  enc.opened_at = w.opened_at;
  enc.closed_at = w.end();
  for (const auto& ev : w.events) {
    EncodedEvent e;
    e.source = ev.source;
    e.rel_time = ev.timestamp - w.opened_at;
    if (ev.voice) {
      e.label = ev.voice->intent;
      e.label_id = intent_id(ev.voice->intent);
      e.slots = ev.voice->slots;
      std::string s;
      for (const auto& [k, v] : ev.voice->slots) s += k + "=" + v + ";";
      e.summary = s;
    } else {
      e.label = ev.gesture->label;
      e.label_id = gesture_id(ev.gesture->label);
      std::string s = "conf=" + format_num(ev.gesture->confidence) + ";";
      for (const auto& [k, p] : ev.gesture->keypoints)
        s += k + "=(" + format_num(p.x()) + "," + format_num(p.y()) + "," + format_num(p.z()) + ");";
      e.summary = s;
    }
    enc.events.push_back(std::move(e));
  }
  return enc;
}

// ---------------------------------------------------------------------------
// Fusion classifier

struct MultimodalCommand {
  CommandKind kind = CommandKind::error;
  std::optional<std::string> object;
  std::optional<Area> area;
  std::optional<std::string> feedback;
  std::pair<double, double> window_span{0.0, 0.0};
};

struct ScoredCommand {
  MultimodalCommand command;
  double score = 1.0;
};

using Classifier = std::function<std::vector<ScoredCommand>(const EncodedWindow&, const RawResults&)>;

/// Default deterministic rule table standing in for a trained fusion model.
///   query intent                         -> response (echoes the answer slot)
///   fetch + object + area slot           -> instruction
///   fetch + object + unambiguous Point-At-> instruction (area from gesture)
///   fetch + object, area unresolvable    -> error asking for the area
///   fetch without object                 -> error asking for the object
///   gesture without any voice intent     -> error asking for a request
///   anything else                        -> error asking to repeat
inline MultimodalCommand rule_classify(const EncodedWindow& enc, const RawResults& raw) {
  MultimodalCommand cmd;
  cmd.window_span = {enc.opened_at, enc.closed_at};

  // latest voice event with a recognized intent wins; slots merge in order
  std::string intent;
  bool any_voice = false, any_gesture = false;
  std::map<std::string, std::string> slots;
  for (const auto& e : enc.events) {
    if (e.source == Source::voice) {
      any_voice = true;
      if (e.label_id != 0) intent = e.label;
      for (const auto& [k, v] : e.slots) slots[k] = v;
    } else {
      any_gesture = true;
    }
  }

  if (intent == "query") {
    cmd.kind = CommandKind::response;
    const auto it = slots.find("answer");
    cmd.feedback = it != slots.end() ? it->second : std::string("OK.");
    return cmd;
  }

  if (intent == "fetch") {
    const auto obj = slots.find("object");
    if (obj == slots.end()) {
      cmd.kind = CommandKind::error;
      cmd.feedback = "Which object should I bring?";
      return cmd;
    }
    std::optional<Area> area;
    if (const auto it = slots.find("area"); it != slots.end()) area = parse_area(it->second);
    if (!area && raw.point_at && raw.point_at->area != PointAtArea::ambiguous)
      area = raw.point_at->area == PointAtArea::left ? Area::left : Area::right;
    if (area) {
      cmd.kind = CommandKind::instruction;
      cmd.object = obj->second;
      cmd.area = area;
      return cmd;
    }
    cmd.kind = CommandKind::error;
    cmd.feedback = "Which area should I pick from?";
    return cmd;
  }

  cmd.kind = CommandKind::error;
  cmd.feedback = (any_gesture && !any_voice)
                     ? "I saw a gesture but no request. What should I do?"
                     : "I did not catch that. Please repeat.";
  return cmd;
}

inline std::vector<ScoredCommand> rule_classifier(const EncodedWindow& enc, const RawResults& raw) {
  return {{rule_classify(enc, raw), 1.0}};
}

/// Run the classifier and take the arg-max; ties keep the earlier candidate.
inline MultimodalCommand fuse(const EncodedWindow& enc, const RawResults& raw,
                              const Classifier& classifier) {
  auto candidates = classifier ? classifier(enc, raw) : rule_classifier(enc, raw);
  require(!candidates.empty(), "fuse: classifier returned no candidates");
  const ScoredCommand* best = &candidates.front();
  for (const auto& c : candidates)
    if (c.score > best->score) best = &c;
  MultimodalCommand cmd = best->command;
  cmd.window_span = {enc.opened_at, enc.closed_at};
  return cmd;
}

/// Spoken feedback for any command: acknowledgment, the stored question, or
/// the stored answer.
inline std::string feedback_text(const MultimodalCommand& cmd) {
  switch (cmd.kind) {
    case CommandKind::instruction:
      return "Picking " + cmd.object.value_or("it") + " from the " +
             std::string(to_string(cmd.area.value_or(Area::left))) + " area.";
    case CommandKind::error:
      return cmd.feedback.value_or("Something went wrong.");
    case CommandKind::response:
      return cmd.feedback.value_or("OK.");
  }
  return "";
}

// ---------------------------------------------------------------------------
// Engine

struct FusionConfig {
  double recognition_time = 2.0;  // R_T [s]
  double lat_threshold = 0.05;
  Vec3 lateral_axis = Vec3::UnitY();
  Classifier classifier;  // empty -> rule table
};

/// Consumes one timestamp-ordered event stream, manages the window life
/// cycle, and emits a fused command whenever a window closes.
class FusionEngine {
 public:
  explicit FusionEngine(FusionConfig cfg = {}) : cfg_(std::move(cfg)) {
    require(cfg_.recognition_time > 0.0, "fusion engine: recognition_time must be > 0");
  }

  /// Feed one event. Returns the command of the previous window when this
  /// event arrives at or past its boundary and thereby closes it.
  std::optional<MultimodalCommand> ingest(const ChannelEvent& e) {
    e.validate();
    double& last = e.source == Source::voice ? last_voice_t_ : last_gesture_t_;
    require(e.timestamp >= last, "fusion engine: time regression within a source");
    last = e.timestamp;

    std::optional<MultimodalCommand> emitted;
    if (window_) {
      require(e.timestamp >= window_->opened_at, "fusion engine: event precedes open window");
      if (e.timestamp < window_->end()) {
        insert_sorted(e);
        return std::nullopt;
      }
      emitted = finalize_window();
    }
    FusionWindow w;
    w.opened_at = e.timestamp;
    w.recognition_time = cfg_.recognition_time;
    window_ = std::move(w);
    insert_sorted(e);
    return emitted;
  }

  /// Clock callback: closes the window once its recognition time elapses
  /// with no newer event.
  std::optional<MultimodalCommand> tick(double now) {
    if (window_ && now >= window_->end()) return finalize_window();
    return std::nullopt;
  }

  bool window_open() const { return window_.has_value(); }
  const FusionWindow& window() const { return *window_; }

 private:
  void insert_sorted(const ChannelEvent& e) {
    auto& ev = window_->events;
    auto pos = ev.end();
    for (auto it = ev.begin(); it != ev.end(); ++it) {
      if (it->timestamp > e.timestamp ||
          (it->timestamp == e.timestamp && it->source > e.source)) {
        pos = it;
        break;
      }
    }
    ev.insert(pos, e);
  }

  MultimodalCommand finalize_window() {
    const EncodedWindow enc = encode_window(*window_);
    RawResults raw;
    for (const auto& ev : window_->events) {
      if (!ev.gesture || ev.gesture->label != "point_at") continue;
      const auto& kp = ev.gesture->keypoints;
      const auto s = kp.find("shoulder"), el = kp.find("elbow"), w = kp.find("wrist");
      if (s == kp.end() || el == kp.end() || w == kp.end()) continue;
      raw.point_at =
          point_at(s->second, el->second, w->second, cfg_.lateral_axis, cfg_.lat_threshold);
    }
    MultimodalCommand cmd = fuse(enc, raw, cfg_.classifier);
    window_.reset();
    return cmd;
  }

  FusionConfig cfg_;
  std::optional<FusionWindow> window_;
  double last_voice_t_ = -std::numeric_limits<double>::infinity();
  double last_gesture_t_ = -std::numeric_limits<double>::infinity();
};

}  // namespace hrc::fusion
