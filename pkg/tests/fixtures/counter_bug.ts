; counter that reaches the error value 3
(system
  (vars (x Int))
  (init (= x 0))
  (trans (= x' (+ x 1)))
  (error (= x 3)))
