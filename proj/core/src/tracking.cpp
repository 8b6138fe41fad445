#include "charonette/tracking.hpp"

#include <algorithm>

#include "charonette/error.hpp"

namespace charonette {

namespace {

// Round-half-up of (v0 * span + (v1 - v0) * offset) / span for span > 0,
// with non-negative coordinates.
int blend(int v0, int v1, std::int64_t offset, std::int64_t span) {
  const std::int64_t numerator = static_cast<std::int64_t>(v0) * span + static_cast<std::int64_t>(v1 - v0) * offset;
  const std::int64_t twice = 2 * numerator + span;
  const std::int64_t denominator = 2 * span;
  std::int64_t q = twice / denominator;
  if (twice % denominator != 0 && twice < 0) --q;
  return static_cast<int>(q);
}

std::string id_text(std::int64_t object_id) { return "object " + std::to_string(object_id); }

[[noreturn]] void illegal(std::int64_t object_id, std::string_view action, TrackState state) {
  throw Error(ErrorCode::illegal_transition,
              "cannot " + std::string(action) + " " + id_text(object_id) + " while " + std::string(to_string(state)));
}

}  // namespace

std::string_view to_string(TrackState state) {
  switch (state) {
    case TrackState::tracking: return "tracking";
    case TrackState::paused: return "paused";
    case TrackState::ended: return "ended";
  }
  return "tracking";
}

std::string_view to_string(TrackOrigin origin) { return origin == TrackOrigin::detector ? "detector" : "human"; }

Box interpolate(const Box& from, std::int64_t from_frame, const Box& to, std::int64_t to_frame, std::int64_t frame) {
  const std::int64_t span = to_frame - from_frame;
  const std::int64_t offset = frame - from_frame;
  return Box{blend(from.xmin, to.xmin, offset, span), blend(from.ymin, to.ymin, offset, span),
             blend(from.xmax, to.xmax, offset, span), blend(from.ymax, to.ymax, offset, span)};
}

std::optional<Box> InterpolatingTracker::box_at(const ObjectTrack& track, std::int64_t frame_index) const {
  for (const auto& segment : track.segments) {
    if (frame_index < segment.start_frame || frame_index > segment.end_frame) continue;
    if (segment.keyframes.empty()) return std::nullopt;
    auto after = segment.keyframes.lower_bound(frame_index);
    if (after != segment.keyframes.end() && after->first == frame_index) return after->second;
    if (after == segment.keyframes.end()) return std::prev(after)->second;
    if (after == segment.keyframes.begin()) return std::nullopt;
    auto before = std::prev(after);
    return interpolate(before->second, before->first, after->second, after->first, frame_index);
  }
  return std::nullopt;
}

std::optional<Box> box_at_frame(const ObjectTrack& track, std::int64_t frame_index) {
  return InterpolatingTracker{}.box_at(track, frame_index);
}

bool track_invariants_hold(const ObjectTrack& track) {
  if (track.segments.empty()) return false;
  for (std::size_t i = 0; i < track.segments.size(); ++i) {
    const auto& s = track.segments[i];
    if (s.start_frame > s.end_frame || s.keyframes.empty()) return false;
    if (s.keyframes.begin()->first != s.start_frame) return false;
    if (s.keyframes.rbegin()->first > s.end_frame) return false;
    if (i > 0 && s.start_frame <= track.segments[i - 1].end_frame) return false;
  }
  return true;
}

TrackBook::TrackBook(VideoBounds bounds, std::int64_t first_object_id) : bounds_(bounds), next_id_(first_object_id) {}

const ObjectTrack* TrackBook::find(std::int64_t object_id) const {
  auto it = std::lower_bound(tracks_.begin(), tracks_.end(), object_id,
                             [](const ObjectTrack& t, std::int64_t id) { return t.object_id < id; });
  return it != tracks_.end() && it->object_id == object_id ? &*it : nullptr;
}

const ObjectTrack& TrackBook::get(std::int64_t object_id) const {
  const ObjectTrack* track = find(object_id);
  if (track == nullptr) throw Error(ErrorCode::unknown_object, "unknown " + id_text(object_id));
  return *track;
}

ObjectTrack& TrackBook::mutable_track(std::int64_t object_id) { return const_cast<ObjectTrack&>(get(object_id)); }

void TrackBook::adopt(ObjectTrack track) {
  next_id_ = std::max(next_id_, track.object_id + 1);
  auto it = std::lower_bound(tracks_.begin(), tracks_.end(), track.object_id,
                             [](const ObjectTrack& t, std::int64_t id) { return t.object_id < id; });
  tracks_.insert(it, std::move(track));
}

void TrackBook::check_box(const Box& box) const {
  if (!box.fits(bounds_.width, bounds_.height)) {
    throw Error(ErrorCode::box_out_of_bounds, "box " + to_string(box) + " is not inside the " +
                                                  std::to_string(bounds_.width) + "x" +
                                                  std::to_string(bounds_.height) + " video");
  }
}

void TrackBook::check_frame(std::int64_t frame_index) const {
  if (frame_index < 0 || (bounds_.frame_count > 0 && frame_index >= bounds_.frame_count)) {
    throw Error(ErrorCode::invalid_index, "frame " + std::to_string(frame_index) + " is outside the video");
  }
}

const ObjectTrack& TrackBook::create_object(std::int64_t frame_index, const Box& box, TrackOrigin origin) {
  check_box(box);
  check_frame(frame_index);
  ObjectTrack track;
  track.object_id = next_id_++;
  track.origin = origin;
  track.state = TrackState::tracking;
  track.segments.push_back(TrackSegment{frame_index, frame_index, {{frame_index, box}}});
  tracks_.push_back(std::move(track));
  return tracks_.back();
}

const ObjectTrack& TrackBook::accept_detection(Detection& detection) {
  if (detection.status != DetectionStatus::pending) {
    throw Error(ErrorCode::detection_consumed, "detection " + std::to_string(detection.id) + " is already " +
                                                   std::string(to_string(detection.status)));
  }
  create_object(detection.frame_index, detection.box, TrackOrigin::detector);
  tracks_.back().detection_ref = detection.id;
  detection.status = DetectionStatus::accepted;
  return tracks_.back();
}

const ObjectTrack& TrackBook::set_keyframe(std::int64_t object_id, std::int64_t frame_index, const Box& box) {
  ObjectTrack& track = mutable_track(object_id);
  if (track.state != TrackState::tracking) illegal(object_id, "place a keyframe on", track.state);
  TrackSegment& segment = track.segments.back();
  if (frame_index < segment.start_frame) {
    throw Error(ErrorCode::frame_before_segment, "frame " + std::to_string(frame_index) +
                                                     " precedes the current segment start " +
                                                     std::to_string(segment.start_frame));
  }
  check_box(box);
  check_frame(frame_index);
  segment.keyframes[frame_index] = box;
  segment.end_frame = std::max(segment.end_frame, frame_index);
  return track;
}

const ObjectTrack& TrackBook::auto_track(std::int64_t object_id, std::int64_t until_frame) {
  ObjectTrack& track = mutable_track(object_id);
  if (track.state != TrackState::tracking) illegal(object_id, "auto-track", track.state);
  TrackSegment& segment = track.segments.back();
  const std::int64_t last_keyframe = segment.keyframes.rbegin()->first;
  if (until_frame < last_keyframe) {
    throw Error(ErrorCode::invalid_index, "auto-track target " + std::to_string(until_frame) +
                                              " precedes the last keyframe " + std::to_string(last_keyframe));
  }
  check_frame(until_frame);
  segment.end_frame = std::max(segment.end_frame, until_frame);
  return track;
}

const ObjectTrack& TrackBook::pause(std::int64_t object_id) {
  ObjectTrack& track = mutable_track(object_id);
  if (track.state != TrackState::tracking) illegal(object_id, "pause", track.state);
  track.state = TrackState::paused;
  return track;
}

const ObjectTrack& TrackBook::resume(std::int64_t object_id, std::int64_t frame_index, const Box& box) {
  ObjectTrack& track = mutable_track(object_id);
  if (track.state != TrackState::paused) illegal(object_id, "resume", track.state);
  if (frame_index <= track.segments.back().end_frame) {
    throw Error(ErrorCode::frame_before_segment, "resume frame " + std::to_string(frame_index) +
                                                     " must follow the previous segment end " +
                                                     std::to_string(track.segments.back().end_frame));
  }
  check_box(box);
  check_frame(frame_index);
  track.segments.push_back(TrackSegment{frame_index, frame_index, {{frame_index, box}}});
  track.state = TrackState::tracking;
  return track;
}

const ObjectTrack& TrackBook::end(std::int64_t object_id) {
  ObjectTrack& track = mutable_track(object_id);
  if (track.state == TrackState::ended) illegal(object_id, "end", track.state);
  track.state = TrackState::ended;
  return track;
}

void TrackBook::remove(std::int64_t object_id) {
  get(object_id);
  std::erase_if(tracks_, [&](const ObjectTrack& t) { return t.object_id == object_id; });
}

}  // namespace charonette
