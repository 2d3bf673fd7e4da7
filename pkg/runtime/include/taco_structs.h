// Example user data structures for the tensor rewriter.  Each struct carries
// to/from conversion function pointers named after the struct, which the
// generated wrappers invoke as `p-><name>2taco(p)` / `p->taco2<name>(t, p)`.

#ifndef TACO_STRUCTS_H
#define TACO_STRUCTS_H

#include "taco_runtime.h"

typedef struct vector {
  int32_t len;
  double* data;
  taco_tensor_t* (*vector2taco)(struct vector*);
  void (*taco2vector)(taco_tensor_t*, struct vector*);
} vector;

inline taco_tensor_t* __vector_to_taco(vector* v) {
  taco_mode_t modes[1] = {taco_mode_dense};
  taco_tensor_t* t = __taco_new_tensor(1, &v->len, modes);
  __taco_set_vals(t, v->data, v->len);
  return t;
}

inline void __taco_to_vector(taco_tensor_t* t, vector* v) {
  memcpy(v->data, t->vals, sizeof(double) * v->len);
}

inline vector make_vector(int32_t len, double* storage) {
  vector v;
  v.len = len;
  v.data = storage;
  v.vector2taco = __vector_to_taco;
  v.taco2vector = __taco_to_vector;
  return v;
}

typedef struct csr {
  int32_t rows;
  int32_t cols;
  int32_t* rowptr;  // rows + 1 entries, nondecreasing
  int32_t* colind;  // rowptr[rows] entries, each < cols
  double* vals;     // rowptr[rows] entries
  taco_tensor_t* (*csr2taco)(struct csr*);
  void (*taco2csr)(taco_tensor_t*, struct csr*);
} csr;

inline taco_tensor_t* __csr_to_taco(csr* m) {
  int32_t dims[2] = {m->rows, m->cols};
  taco_mode_t modes[2] = {taco_mode_dense, taco_mode_sparse};
  taco_tensor_t* t = __taco_new_tensor(2, dims, modes);
  int32_t nnz = m->rowptr[m->rows];
  __taco_set_sparse_mode(t, 1, m->rowptr, m->rows + 1, m->colind, nnz);
  __taco_set_vals(t, m->vals, nnz);
  return t;
}

// Writes back into the caller-owned arrays; the sparsity pattern must have
// the same number of nonzeros as when the tensor was created.
inline void __taco_to_csr(taco_tensor_t* t, csr* m) {
  int32_t* pos = (int32_t*)(t->indices[1][0]);
  int32_t* crd = (int32_t*)(t->indices[1][1]);
  int32_t nnz = pos[m->rows];
  memcpy(m->rowptr, pos, sizeof(int32_t) * (m->rows + 1));
  memcpy(m->colind, crd, sizeof(int32_t) * nnz);
  memcpy(m->vals, t->vals, sizeof(double) * nnz);
}

inline csr make_csr(int32_t rows, int32_t cols, int32_t* rowptr,
                    int32_t* colind, double* vals) {
  csr m;
  m.rows = rows;
  m.cols = cols;
  m.rowptr = rowptr;
  m.colind = colind;
  m.vals = vals;
  m.csr2taco = __csr_to_taco;
  m.taco2csr = __taco_to_csr;
  return m;
}

#endif  // TACO_STRUCTS_H
