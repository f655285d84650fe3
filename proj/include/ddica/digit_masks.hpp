#pragma once

// Fixed 33x33 support masks for the three spatial sources of the sim1
// benchmark: one "1", two "2"s and three "3"s. '#' marks an active pixel.

#include <array>
#include <string_view>

namespace ddica::fixtures {

inline constexpr std::array<std::string_view, 33> kDigitOne = {
    ".................................",
    ".................................",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..........########...............",
    "..........########...............",
    "..........########...............",
    "..........########...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..............####...............",
    "..........############...........",
    "..........############...........",
    "..........############...........",
    "..........############...........",
    ".................................",
    ".................................",
    ".................................",
};

inline constexpr std::array<std::string_view, 33> kDigitTwoTwo = {
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    "....#########.......#########....",
    "....#########.......#########....",
    "....#########.......#########....",
    ".###.........###.###.........###.",
    ".###.........###.###.........###.",
    ".###.........###.###.........###.",
    ".............###.............###.",
    ".............###.............###.",
    ".............###.............###.",
    "..........###.............###....",
    "..........###.............###....",
    "..........###.............###....",
    ".......###.............###.......",
    ".......###.............###.......",
    ".......###.............###.......",
    "....###.............###..........",
    "....###.............###..........",
    "....###.............###..........",
    ".###############.###############.",
    ".###############.###############.",
    ".###############.###############.",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
};

inline constexpr std::array<std::string_view, 33> kDigitThreeThreeThree = {
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    "##########.##########.##########.",
    "##########.##########.##########.",
    "......##.........##.........##...",
    "......##.........##.........##...",
    "....##.........##.........##.....",
    "....##.........##.........##.....",
    "......##.........##.........##...",
    "......##.........##.........##...",
    "........##.........##.........##.",
    "........##.........##.........##.",
    "##......##.##......##.##......##.",
    "##......##.##......##.##......##.",
    "..######.....######.....######...",
    "..######.....######.....######...",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
    ".................................",
};
inline constexpr std::array<std::array<std::string_view, 33>, 3> kSim1Masks = {
    kDigitOne, kDigitTwoTwo, kDigitThreeThreeThree};

}  // namespace ddica::fixtures
