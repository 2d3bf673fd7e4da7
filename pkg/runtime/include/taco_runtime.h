// Tensor runtime consumed by generated assemble/compute kernels and by the
// conversion wrappers.  The taco_tensor_t layout follows the published TACO
// runtime structure; generated code reads dimensions, per-mode index arrays
// (pos/crd for sparse modes), and the byte-addressed value array.
//
// All allocations made by conversion helpers are tracked in a registry so
// tests can assert that __taco_cleanup_taco released everything.

#ifndef TACO_RUNTIME_H
#define TACO_RUNTIME_H

#include <stdint.h>
#include <stdlib.h>
#include <string.h>

#include <unordered_set>

typedef enum { taco_mode_dense, taco_mode_sparse } taco_mode_t;

typedef struct taco_tensor_t {
  int32_t order;          // tensor order (number of modes)
  int32_t* dimensions;    // tensor dimensions
  int32_t csize;          // component size
  int32_t* mode_ordering; // mode storage ordering
  taco_mode_t* mode_types; // mode storage types
  uint8_t*** indices;     // tensor index data (per mode)
  uint8_t* vals;          // tensor values
  int32_t vals_size;      // values array size
} taco_tensor_t;

inline std::unordered_set<void*>& __taco_alloc_registry() {
  static std::unordered_set<void*> registry;
  return registry;
}

inline void* __taco_tracked_malloc(size_t bytes) {
  void* p = malloc(bytes ? bytes : 1);
  __taco_alloc_registry().insert(p);
  return p;
}

inline void __taco_tracked_free(void* p) {
  if (!p) return;
  __taco_alloc_registry().erase(p);
  free(p);
}

// Number of conversion-made allocations not yet released.
inline int __taco_live_conversion_allocs() {
  return (int)__taco_alloc_registry().size();
}

inline taco_tensor_t* __taco_new_tensor(int32_t order, const int32_t* dims,
                                        const taco_mode_t* modes) {
  taco_tensor_t* t =
      (taco_tensor_t*)__taco_tracked_malloc(sizeof(taco_tensor_t));
  t->order = order;
  t->csize = (int32_t)sizeof(double);
  t->dimensions = (int32_t*)__taco_tracked_malloc(sizeof(int32_t) * order);
  t->mode_ordering = (int32_t*)__taco_tracked_malloc(sizeof(int32_t) * order);
  t->mode_types = (taco_mode_t*)__taco_tracked_malloc(sizeof(taco_mode_t) * order);
  t->indices = (uint8_t***)__taco_tracked_malloc(sizeof(uint8_t**) * order);
  for (int32_t m = 0; m < order; m++) {
    t->dimensions[m] = dims ? dims[m] : 0;
    t->mode_ordering[m] = m;
    t->mode_types[m] = modes ? modes[m] : taco_mode_dense;
    t->indices[m] = NULL;
  }
  t->vals = NULL;
  t->vals_size = 0;
  return t;
}

inline void __taco_set_vals(taco_tensor_t* t, const double* data,
                            int32_t count) {
  t->vals = (uint8_t*)__taco_tracked_malloc(sizeof(double) * count);
  if (data) memcpy(t->vals, data, sizeof(double) * count);
  else memset(t->vals, 0, sizeof(double) * count);
  t->vals_size = count;
}

inline void __taco_set_sparse_mode(taco_tensor_t* t, int32_t mode,
                                   const int32_t* pos, int32_t pos_len,
                                   const int32_t* crd, int32_t crd_len) {
  t->mode_types[mode] = taco_mode_sparse;
  t->indices[mode] = (uint8_t**)__taco_tracked_malloc(sizeof(uint8_t*) * 2);
  int32_t* pos_copy = (int32_t*)__taco_tracked_malloc(sizeof(int32_t) * pos_len);
  int32_t* crd_copy =
      (int32_t*)__taco_tracked_malloc(sizeof(int32_t) * (crd_len ? crd_len : 1));
  memcpy(pos_copy, pos, sizeof(int32_t) * pos_len);
  if (crd_len) memcpy(crd_copy, crd, sizeof(int32_t) * crd_len);
  t->indices[mode][0] = (uint8_t*)pos_copy;
  t->indices[mode][1] = (uint8_t*)crd_copy;
}

inline void __taco_cleanup_taco(taco_tensor_t* t) {
  if (!t) return;
  if (t->indices) {
    for (int32_t m = 0; m < t->order; m++) {
      if (t->indices[m]) {
        __taco_tracked_free(t->indices[m][0]);
        __taco_tracked_free(t->indices[m][1]);
        __taco_tracked_free(t->indices[m]);
      }
    }
    __taco_tracked_free(t->indices);
  }
  __taco_tracked_free(t->dimensions);
  __taco_tracked_free(t->mode_ordering);
  __taco_tracked_free(t->mode_types);
  __taco_tracked_free(t->vals);
  __taco_tracked_free(t);
}

#endif  // TACO_RUNTIME_H
