#include "memtrack/simulator.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace memtrack::sim {

namespace {

constexpr const char* kS1 = R"(# Occlusion and re-entry. A disappears behind a hidden interval and comes
# back at full visibility. On the first re-entry frame its record may
# report the nearest other instrument; the vote still accepts.
[scenario]
name = S1
description = single occlusion with re-entry
frames = 60
confusion_probability = 0.5

[object A]
track = 1
class = 1
label = bipolar_forceps
shape = rect
size = 36 24
path = 0: 40 40; 59: 56 48
hidden = 22-31

[object B]
track = 2
class = 2
label = large_needle_driver
shape = ellipse
size = 32 32
path = 0: 88 88; 59: 84 80

[expect full]
decisions.1 = accept

[expect reid]
decisions.1 = accept
)";

constexpr const char* kS2 = R"(# Turnover. A leaves to the right, C enters from the top while B stays
# put. Once C is fully in view, A's track starts segmenting C.
[scenario]
name = S2
description = one instrument exits while another enters
frames = 60
confusion_score = 1.0

[object A]
track = 1
class = 1
label = bipolar_forceps
shape = rect
size = 36 24
path = 0: 64 40; 12: 64 40; 24: 150 40
confuse = 36-59 C

[object B]
track = 2
class = 2
label = large_needle_driver
shape = ellipse
size = 32 32
path = 0: 40 96; 59: 44 92

[object C]
track = 3
class = 3
label = prograsp_forceps
shape = rect
size = 28 36
path = 0: 96 -30; 24: 96 -30; 34: 96 70; 59: 92 74

[expect full]
decisions.1 = reassign:3
id_switches = 0

[expect reid]
decisions.1 = reassign:3
id_switches = 0

[expect baseline]
id_switches = >=1
)";

constexpr const char* kS3 = R"(# Post-exit hallucination. CA leaves through the top edge, stays gone for
# a few frames, then its track locks onto B with full confidence.
[scenario]
name = S3
description = exited instrument hallucinated on another one
frames = 60
confusion_score = 1.0

[object B]
track = 1
class = 1
label = large_needle_driver
shape = ellipse
size = 36 30
path = 0: 50 90; 59: 80 90

[object CA]
track = 2
class = 2
label = clip_applier
shape = rect
size = 32 28
path = 0: 70 40; 14: 70 40; 26: 70 -30
confuse = 30-59 B

[expect full]
decisions.2 = reassign:1
silent_after.2 = 23

[expect reid]
decisions.2 = reassign:1
silent_after.2 = 23
)";

constexpr const char* kS4 = R"(# Simultaneous exit and swapped re-entry. A leaves left and B leaves right;
# they come back on the opposite sides with a new pose, and each track
# follows the other instrument.
[scenario]
name = S4
description = two instruments exit together and re-enter swapped
frames = 60
confusion_score = mirror

[object A]
track = 1
class = 1
label = bipolar_forceps
shape = rect
size = 32 24
path = 0: 40 64; 10: 40 64; 20: -30 64; 28: 160 40; 38: 96 40 24 40; 59: 90 44 24 40
hidden = 21-28
confuse = 29-59 B

[object B]
track = 2
class = 2
label = large_needle_driver
shape = ellipse
size = 30 30
path = 0: 88 64; 10: 88 64; 20: 160 64; 28: -30 90; 38: 36 90 36 28; 59: 40 86 36 28
hidden = 21-28
confuse = 29-59 A

[expect full]
decisions.1 = reassign:2
decisions.2 = reassign:1
id_switches = 0

[expect reid]
decisions.1 = reassign:2
decisions.2 = reassign:1
id_switches = 0

[expect baseline]
id_switches = >=2
)";

constexpr const char* kS5 = R"(# Low visibility before an occlusion. A is always partly covered, so its
# reliability never reaches the relevance threshold and its feature bank
# stays empty. It slides under a large occluder and its track then locks
# onto B. Only the occlusion-aware memory holds A's appearance.
[scenario]
name = S5
description = partly covered instrument occluded then hallucinated
frames = 60
confusion_score = 1.0
occlusion_band = true

[object A]
track = 1
class = 1
label = bipolar_forceps
shape = rect
size = 32 32
path = 0: 40 64; 16: 40 64; 30: 100 64
confuse = 36-59 B

[object B]
track = 2
class = 2
label = large_needle_driver
shape = ellipse
size = 34 30
path = 0: 30 104; 59: 50 104

[object P]
tracked = false
shape = rect
size = 8 13
path = 0: 52 64; 16: 52 64; 30: 112 64

[object O]
tracked = false
shape = rect
size = 44 60
path = 0: 100 64

[expect full]
decisions.1 = reassign:2

[expect reid]
decisions.1 = accept
)";

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"S1", "S2", "S3", "S4", "S5"};
  return names;
}

std::string_view catalog_text(std::string_view name) {
  if (name == "S1") return kS1;
  if (name == "S2") return kS2;
  if (name == "S3") return kS3;
  if (name == "S4") return kS4;
  if (name == "S5") return kS5;
  throw std::invalid_argument("unknown catalog scenario '" + std::string(name) + "'");
}

}  // namespace memtrack::sim
