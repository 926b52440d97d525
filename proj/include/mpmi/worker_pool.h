// Copyright 2026 The MPMI Shared Control Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MPMI_WORKER_POOL_H_
#define MPMI_WORKER_POOL_H_

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mpmi {

// Fixed set of threads for fork-join loops. The calling thread takes part,
// so a pool of size 1 runs everything inline.
class WorkerPool {
 public:
  // workers <= 0 selects std::thread::hardware_concurrency().
  explicit WorkerPool(int workers = 1);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return static_cast<int>(threads_.size()) + 1; }

  // Calls body(begin, end) over disjoint chunks covering [0, count) and
  // returns once all chunks are done. Not reentrant.
  void ParallelFor(int count, const std::function<void(int, int)>& body);

 private:
  void WorkerLoop();
  void RunChunks();

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int, int)>* body_ = nullptr;
  int count_ = 0;
  int chunk_ = 1;
  int next_ = 0;
  int busy_ = 0;
  unsigned long generation_ = 0;
  bool shutdown_ = false;
};

}  // namespace mpmi

#endif  // MPMI_WORKER_POOL_H_
