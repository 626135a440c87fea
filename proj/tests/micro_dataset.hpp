#pragma once

// Three 4x4 frames with hand-counted overlaps, classes {1, 2, 3}.
//
// frame 0: class 1 gt 4 pred 5 inter 4 union 5; class 2 gt 4 pred 3 inter 3 union 4
// frame 1: class 1 gt 4 pred 2 inter 2 union 4; class 3 gt 0 pred 2 union 2
// frame 2: class 2 gt 4 pred 3 inter 3 union 4
//
// present (frame, class) IoUs: 4/5, 3/4, 1/2, 3/4 -> mean 0.7
// dataset class IoU: 1 -> 6/9, 2 -> 6/8, 3 -> 0/2
// iou over gt classes {1, 2}: (2/3 + 3/4) / 2 = 17/24
// mciou over {1, 2, 3}: (2/3 + 3/4 + 0) / 3 = 17/36

#include "memtrack/label_map.hpp"

#include <string>
#include <vector>

namespace memtrack::testing {

inline LabelMap label_rows(const std::vector<std::string>& rows) {
  LabelMap m(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
  for (std::size_t y = 0; y < rows.size(); ++y) {
    for (std::size_t x = 0; x < rows[y].size(); ++x) {
      m.set(static_cast<int>(x), static_cast<int>(y), static_cast<std::uint8_t>(rows[y][x] - '0'));
    }
  }
  return m;
}

struct MicroDataset {
  std::vector<LabelMap> pred;
  std::vector<LabelMap> gt;
  std::vector<ClassId> classes{1, 2, 3};
  double challenge_iou = 70.0;
  double iou = 100.0 * 17.0 / 24.0;
  double mciou = 100.0 * 17.0 / 36.0;
};

inline MicroDataset micro_dataset() {
  MicroDataset d;
  d.gt.push_back(label_rows({"1100", "1100", "0022", "0022"}));
  d.pred.push_back(label_rows({"1110", "1100", "0002", "0022"}));
  d.gt.push_back(label_rows({"1100", "1100", "0000", "0000"}));
  d.pred.push_back(label_rows({"1000", "1000", "0033", "0000"}));
  d.gt.push_back(label_rows({"0000", "0220", "0220", "0000"}));
  d.pred.push_back(label_rows({"0000", "0220", "0200", "0000"}));
  return d;
}

}  // namespace memtrack::testing
