#include "acc/tuner.hpp"

namespace acc {

Json QTable::to_json() const {
  Json arr = Json::array();
  for (auto& [key, vals] : q) {
    arr.push_back(Json{{"level", to_string(static_cast<Level>(key.first))},
                       {"bucket", bucket_value(key.second)},
                       {"wait", vals[0]},
                       {"downgrade", vals[1]}});
  }
  return arr;
}

QTable QTable::from_json(const Json& j) {
  QTable t;
  for (const auto& row : j) {
    int level = row.at("level").get<std::string>() == "cf" ? 1 : 2;
    int bucket = bucket_index(row.at("bucket").get<int>());
    t.q[{level, bucket}] = {row.at("wait").get<double>(),
                            row.at("downgrade").get<double>()};
  }
  return t;
}

}  // namespace acc
