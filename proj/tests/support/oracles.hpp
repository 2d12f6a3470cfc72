#pragma once

// Reference implementations used to check the library. Each one is written
// from the definition of the property, never by calling the code under test.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "swarmlink/links.hpp"
#include "swarmlink/types.hpp"

namespace swarmlink::oracle {

Bytes hex(const std::string& s);

/// Nodes within `max_hops` edges of `origin` (origin excluded), by plain BFS
/// over an undirected adjacency list.
std::set<NodeId> bfs_within(const std::map<NodeId, std::set<NodeId>>& adjacency, NodeId origin,
                            std::size_t max_hops);

bool connected(const std::map<NodeId, std::set<NodeId>>& adjacency);

/// Order-preserving first-fit: each item goes into the earliest frame that
/// still has room and keeps input order, i.e. the frame holding the previous
/// item or a new one. `capacity` bounds the total size per frame including
/// `per_frame` fixed bytes. Returns the item indices per frame.
std::vector<std::vector<std::size_t>> first_fit(const std::vector<std::size_t>& sizes,
                                                std::size_t capacity, std::size_t per_frame);

/// Largest transmitted time inside any window [t, t + width], checked at
/// every record start and end, summing overlaps directly.
SimDuration brute_force_window_airtime(const std::vector<links::AirtimeRecord>& records,
                                       SimDuration width);

}  // namespace swarmlink::oracle
