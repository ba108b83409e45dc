"""
LIBSVM files and the command line
=================================

Data is read from LIBSVM text (``label idx:val ...``) or from a feature
file plus a label file. The ``linopt`` command wraps training,
prediction and a small solver benchmark.
"""

import io
import tempfile
from pathlib import Path

from linopt import data_path, read_libsvm, write_libsvm
from linopt.cli import main

d = read_libsvm(data_path("separable4.libsvm"))
print(d.num_examples, "examples,", d.num_features, "features")
buf = io.StringIO()
write_libsvm(d, buf, index_base=0)
print(buf.getvalue())

with tempfile.TemporaryDirectory() as tmp:
    model = str(Path(tmp) / "model.txt")
    feat, lab = str(data_path("multiclass20.feat")), str(data_path("multiclass20.label"))
    # same as: linopt -method 3 -algtype 0 -reg 0.25 -nClasses 20 ...
    main(["-method", "3", "-algtype", "0", "-reg", "0.25", "-nClasses", "20",
          "-maxIter", "1000", "-startwith1", "true",
          "-trainFeatureFile", feat, "-trainLabelFile", lab,
          "-testFeatureFile", feat, "-testLabelFile", lab, "-modelOut", model])
    print(Path(model).read_text().splitlines()[0])

# unsupported objective/solver pairs show up as '*'
main(["bench", "-trainFile", str(data_path("binary200.libsvm"))])
