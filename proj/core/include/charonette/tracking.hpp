#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "charonette/geometry.hpp"
#include "charonette/video_ingest.hpp"

namespace charonette {

enum class TrackState { tracking, paused, ended };
enum class TrackOrigin { detector, human };
std::string_view to_string(TrackState state);
std::string_view to_string(TrackOrigin origin);

// A run of frames in which the object is visible. The first keyframe always
// sits on start_frame; every keyframe lies within [start_frame, end_frame].
struct TrackSegment {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  std::map<std::int64_t, Box> keyframes;

  friend bool operator==(const TrackSegment&, const TrackSegment&) = default;
};

struct ObjectTrack {
  std::int64_t object_id = 0;
  std::vector<TrackSegment> segments;  // disjoint, ordered
  TrackState state = TrackState::tracking;
  TrackOrigin origin = TrackOrigin::human;
  std::optional<std::int64_t> detection_ref;

  friend bool operator==(const ObjectTrack&, const ObjectTrack&) = default;
};

struct VideoBounds {
  int width = 0;
  int height = 0;
  std::int64_t frame_count = 0;  // 0 when the length is unknown
};

// Integer coordinate-wise linear blend of two keyframe boxes, rounding half up.
Box interpolate(const Box& from, std::int64_t from_frame, const Box& to, std::int64_t to_frame, std::int64_t frame);

// Produces boxes between and after keyframes. The default implementation
// interpolates linearly and holds the last keyframe until the segment end.
class Tracker {
 public:
  virtual ~Tracker() = default;
  virtual std::optional<Box> box_at(const ObjectTrack& track, std::int64_t frame_index) const = 0;
};

class InterpolatingTracker final : public Tracker {
 public:
  std::optional<Box> box_at(const ObjectTrack& track, std::int64_t frame_index) const override;
};

// Absent outside every segment.
std::optional<Box> box_at_frame(const ObjectTrack& track, std::int64_t frame_index);

// Segments ordered and disjoint, each non-empty with keyframes inside it and
// one keyframe on its start frame.
bool track_invariants_hold(const ObjectTrack& track);

/// Object tracks of one video document, with the lifecycle operations the
/// annotator drives: create / accept a detection, place keyframes, auto-track,
/// pause at a cut, resume in a new segment, end, delete.
///
/// Object ids come from a per-document counter that never hands out the same
/// id twice; the counter can be seeded (e.g. to continue an existing
/// numbering).
class TrackBook {
 public:
  TrackBook() = default;
  explicit TrackBook(VideoBounds bounds, std::int64_t first_object_id = 1);

  const VideoBounds& bounds() const { return bounds_; }
  std::int64_t next_object_id() const { return next_id_; }
  void set_next_object_id(std::int64_t next) { next_id_ = next; }

  const std::vector<ObjectTrack>& tracks() const { return tracks_; }
  const ObjectTrack* find(std::int64_t object_id) const;
  const ObjectTrack& get(std::int64_t object_id) const;  // throws unknown_object
  void adopt(ObjectTrack track);  // restore from storage

  // Throws box_out_of_bounds, invalid_index (frame outside the video).
  const ObjectTrack& create_object(std::int64_t frame_index, const Box& box, TrackOrigin origin = TrackOrigin::human);
  // Throws detection_consumed when the detection is not pending.
  const ObjectTrack& accept_detection(Detection& detection);

  const ObjectTrack& set_keyframe(std::int64_t object_id, std::int64_t frame_index, const Box& box);
  const ObjectTrack& auto_track(std::int64_t object_id, std::int64_t until_frame);
  const ObjectTrack& pause(std::int64_t object_id);
  const ObjectTrack& resume(std::int64_t object_id, std::int64_t frame_index, const Box& box);
  const ObjectTrack& end(std::int64_t object_id);
  void remove(std::int64_t object_id);

 private:
  ObjectTrack& mutable_track(std::int64_t object_id);
  void check_box(const Box& box) const;
  void check_frame(std::int64_t frame_index) const;

  VideoBounds bounds_;
  std::int64_t next_id_ = 1;
  std::vector<ObjectTrack> tracks_;  // ordered by object id
};

}  // namespace charonette
