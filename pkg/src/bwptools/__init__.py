# -*- coding: utf-8 -*-
__path__ = __import__('pkgutil').extend_path(__path__, __name__)

from .utils import *
from .utils_output import *
from .specfun import *
from .model import *
from .optimize import *
from .mcsim import *
from .reproduce import *
