#pragma once

#include <map>

#include <Eigen/Dense>

#include "tkgx/tkg.hpp"

namespace tkgx {

/// Final (or input) vectors for every component of a graph being encoded.
struct EmbeddingSet {
  std::map<EntityId, Eigen::VectorXd> entity;
  std::map<RelationId, Eigen::VectorXd> relation;
  std::map<TimeId, Eigen::VectorXd> timestamp;

  bool covers(const Quadruple& q) const {
    return entity.count(q.s) && entity.count(q.o) && relation.count(q.r) && timestamp.count(q.t);
  }
};

}  // namespace tkgx
